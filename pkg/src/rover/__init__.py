"""Crash-repair toolkit for sanitizer-detected C/C++ vulnerabilities.

Pipeline stages: parse the sanitizer report, enrich it with the dynamic
call graph of the crashing input, search the codebase structurally,
prompt an LLM agent for candidate patches, validate them against the
exploit, and score the survivors.
"""

__version__ = "0.1.0"
