"""CLI command handlers.

Every handler takes a validated RunConfig, does its work through the services,
writes its artifacts under ``output_dir`` and returns a result dict with a
``success`` key. Failures are logged and reported with ``kind`` set to
``input`` (bad config, data or paths) or ``internal``.
"""

import functools
import logging
import os
import re

logger = logging.getLogger(__name__)

INPUT_ERRORS = (ValueError, KeyError, FileNotFoundError)


def command(func):
    """Turn exceptions raised by a handler into a failed result dict."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except INPUT_ERRORS as e:
            message = e.args[0] if isinstance(e, KeyError) and e.args else str(e)
            logger.error(f"{func.__name__} failed: {message}")
            return {"success": False, "error": str(message), "kind": "input"}
        except Exception as e:
            logger.exception(f"{func.__name__} failed with an internal error")
            return {"success": False, "error": str(e), "kind": "internal"}
    return wrapper


def ensure_output_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def safe_name(thread_id: str) -> str:
    """Directory-safe version of a thread id"""
    return re.sub(r"[^A-Za-z0-9_.-]", "_", thread_id)


def load_corpus(config):
    """Parse, filter and tokenize the configured input threads."""
    from services.thread_parser import ThreadParser, build_corpus, filter_threads

    config.require_paths("input_path")
    parser = ThreadParser(fmt=config.input_format)
    with open(config.input_path, encoding="utf-8") as f:
        trees = parser.parse(f)
    trees = filter_threads(trees, config.min_descendants)
    if not trees:
        raise ValueError(f"No threads left in {config.input_path} after parsing and filtering")
    corpus = build_corpus(trees, config.tokenizer, min_count=config.min_count)
    return corpus, parser.report
