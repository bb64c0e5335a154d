"""
File formats: sequence files, witness JSON records and key=value config files.
"""

import json
import logging
import re
from pathlib import Path

import numpy as np

from constants import CHAR_SIGNS, SEQUENCE_MAGIC, SIGN_CHARS
from errors import InputError
from hardy.seqgen import BinarySequence, SequenceMeta

logger = logging.getLogger(__name__)

_HEADER_RE = re.compile(r'^# hardyseq v1 N=(\d+) f="(.*)"$')


def format_sequence(E: BinarySequence) -> str:
    source = E.meta.source.replace('"', "'")
    signs = "".join(SIGN_CHARS[int(x)] for x in E.signs)
    return f'{SEQUENCE_MAGIC} N={len(E)} f="{source}"\n{signs}\n'


def parse_sequence(text: str) -> BinarySequence:
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if len(lines) != 2:
        raise InputError("a sequence file holds one header line and one line of signs")
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise InputError(f"bad sequence header: {lines[0]!r}")
    N, source = int(m.group(1)), m.group(2)
    body = lines[1]
    if len(body) != N:
        raise InputError(f"header announces N={N} but found {len(body)} signs")
    try:
        signs = np.fromiter((CHAR_SIGNS[ch] for ch in body), dtype=np.int8, count=N)
    except KeyError as e:
        raise InputError(f"unexpected sign character {e.args[0]!r}") from None
    return BinarySequence(signs, SequenceMeta(source=source, policy="file"))


def write_sequence(E: BinarySequence, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_sequence(E), encoding="utf-8")
    logger.info("Wrote %d signs to %s", len(E), path)
    return path


def read_sequence(path: str | Path) -> BinarySequence:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"cannot read sequence file {path}: {e}") from e
    return parse_sequence(text)


def witness_json(record: dict) -> str:
    """Compact, key-sorted JSON (stable across runs)."""
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def read_config_file(path: str | Path) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise InputError(f"cannot read config file {path}: {e}") from e
    settings: dict[str, str] = {}
    for number, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise InputError(f"{path}:{number}: expected key=value, got {raw!r}")
        settings[key.strip().replace("_", "-")] = value.strip()
    return settings
