"""Preprocessing companions for the perturbation harness: CoNLL-U export and
a translator child process speaking the line-JSON protocol."""

from .export import MissingModelError, PrepJob, export_conllu

__version__ = "0.1.0"
