import io
import json
import random
import subprocess
import sys

import pytest

from permuteval.translate import TranslatorConfig, translate_batch

from nlp_prep.adapter import serve

ADAPTER_CMD = f"{sys.executable} -m nlp_prep.adapter --echo"


class TestEchoConformance:
    """The primary harness, re-pointed at this adapter in echo mode."""

    def test_all_ids_resolve_for_any_input_order(self):
        rng = random.Random(11)
        requests = [{"id": f"req-{i}", "text": f"payload {i} {rng.random()}"}
                    for i in range(60)]
        rng.shuffle(requests)
        config = TranslatorConfig(mode="subprocess", command=ADAPTER_CMD, batch_size=7)
        results = translate_batch(config, requests)
        assert results == [{"id": r["id"], "translation": r["text"]} for r in requests]

    def test_ten_line_batch_preserves_ids(self):
        requests = [{"id": str(i), "text": f"line {i}"} for i in range(10)]
        config = TranslatorConfig(mode="subprocess", command=ADAPTER_CMD, batch_size=10)
        results = translate_batch(config, requests)
        assert [r["id"] for r in results] == [r["id"] for r in requests]
        assert all(r["translation"] == f"line {r['id']}" for r in results)


class TestMalformedInput:
    def run_lines(self, lines):
        out = io.StringIO()
        serve(lambda text: text, stdin=io.StringIO("".join(lines)), stdout=out)
        return [json.loads(line) for line in out.getvalue().splitlines()]

    def test_error_object_then_continue(self):
        responses = self.run_lines([
            "this is not json\n",
            json.dumps({"id": "ok", "text": "still alive"}) + "\n",
        ])
        assert len(responses) == 2
        assert responses[0]["id"] is None and "error" in responses[0]
        assert responses[1] == {"id": "ok", "translation": "still alive"}

    def test_missing_text_reports_offending_id(self):
        responses = self.run_lines([json.dumps({"id": "r7"}) + "\n"])
        assert responses[0]["id"] == "r7"
        assert "error" in responses[0]

    def test_error_object_is_fatal_to_the_harness(self):
        # the primary side treats an error object (no translation) as a
        # protocol violation, by design
        from permuteval.translate import TranslationError
        code = ('import sys,json; req=json.loads(sys.stdin.readline()); '
                'print(json.dumps({"id": req["id"], "error": "boom"}), flush=True); '
                'sys.stdin.read()')
        config = TranslatorConfig(mode="subprocess",
                                  command=f"{sys.executable} -c '{code}'")
        with pytest.raises(TranslationError, match="malformed"):
            translate_batch(config, [{"id": "a", "text": "x"}])


def test_flush_per_line():
    """Each response must be readable before the next request is written."""
    proc = subprocess.Popen([sys.executable, "-m", "nlp_prep.adapter", "--echo"],
                            stdin=subprocess.PIPE, stdout=subprocess.PIPE, text=True,
                            bufsize=1)
    try:
        for i in range(5):
            proc.stdin.write(json.dumps({"id": str(i), "text": f"t{i}"}) + "\n")
            proc.stdin.flush()
            response = json.loads(proc.stdout.readline())
            assert response == {"id": str(i), "translation": f"t{i}"}
    finally:
        proc.stdin.close()
        proc.wait(timeout=10)
