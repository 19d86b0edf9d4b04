"""Binary model files: save, load, plain-text dumps, and name resolution.

Layout (all little-endian): 4-byte magic, u32 format version, tag-scheme
block, template block, feature string table in ID order, emission weights
as raw float64, the transition matrix, a JSON provenance blob, and a
trailing 8-byte checksum (the first 8 bytes of the SHA-256 of everything
before it).  Provenance never includes timestamps so identical training
runs produce identical files.

Validation order on load is fixed: length, magic, version, checksum, then
parse, then reject any leftover bytes.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from typing import Optional

import numpy as np

from .corpus import NormalizationConfig, TagScheme
from .crf import CrfModel
from .errors import (
    BadMagicError,
    ChecksumError,
    ModelFormatError,
    TruncatedModelError,
    UnknownModelError,
    UnsupportedVersionError,
)
from .features import FeatureIndex, TemplateConfig

MAGIC = b"PKSG"
FORMAT_VERSION = 1

KNOWN_MODEL_NAMES = ("default", "news", "medicine", "tourism", "web")
MODEL_DIR_ENV = "SEGKIT_MODEL_DIR"


def _pack_str(text: str) -> bytes:
    raw = text.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedModelError("model file ends in the middle of a record")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def string(self) -> str:
        n = self.u32()
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelFormatError(f"undecodable string in model file: {exc}") from exc

    def done(self) -> bool:
        return self.pos == len(self.data)


def save(model: CrfModel, path, provenance: Optional[dict] = None):
    """Write the model atomically (temp file + rename in the same directory)."""
    model.validate()
    body = bytearray()
    body += MAGIC
    body += struct.pack("<I", FORMAT_VERSION)

    scheme = model.scheme
    body += struct.pack("<B", 1 if scheme.joint else 0)
    labels = scheme.pos_labels if scheme.joint else ()
    body += struct.pack("<I", len(labels))
    for label in labels:
        body += _pack_str(label)

    cfg = model.template_cfg
    norm = cfg.normalization
    body += struct.pack(
        "<7B",
        cfg.unigram_window,
        int(cfg.bigrams),
        int(cfg.lexicon_feats),
        cfg.l_max,
        int(norm.fold_fullwidth),
        int(norm.digit_class),
        int(norm.latin_class),
    )

    strings = model.index.strings()
    body += struct.pack("<I", len(strings))
    for s in strings:
        body += _pack_str(s)

    body += np.ascontiguousarray(model.weights, dtype="<f8").tobytes()
    body += np.ascontiguousarray(model.transitions, dtype="<f8").tobytes()

    blob = json.dumps(provenance or {}, ensure_ascii=False, sort_keys=True)
    body += _pack_str(blob)

    body += hashlib.sha256(bytes(body)).digest()[:8]

    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(prefix=".segkit-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(bytes(body))
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def load(path) -> CrfModel:
    """Read and validate a model file; raises a distinct error per defect."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 16:
        raise TruncatedModelError(f"model file is too short ({len(data)} bytes)")
    if data[:4] != MAGIC:
        raise BadMagicError("not a model file (bad magic bytes)")
    version = struct.unpack("<I", data[4:8])[0]
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"model format version {version} is not supported (expected {FORMAT_VERSION})"
        )
    digest = hashlib.sha256(data[:-8]).digest()[:8]
    if digest != data[-8:]:
        raise ChecksumError("model file checksum mismatch (file is corrupt)")

    rd = _Reader(data[8:-8])
    joint = rd.u8()
    if joint not in (0, 1):
        raise ModelFormatError(f"bad tag-scheme flag {joint}")
    n_labels = rd.u32()
    labels = [rd.string() for _ in range(n_labels)]
    if joint:
        scheme = TagScheme.joint_pos(labels)
    else:
        if labels:
            raise ModelFormatError("plain segmentation model carries POS labels")
        scheme = TagScheme.bmes()

    window, bigrams, lex, l_max, fold, digit, latin = (rd.u8() for _ in range(7))
    try:
        tcfg = TemplateConfig(
            unigram_window=window,
            bigrams=bool(bigrams),
            lexicon_feats=bool(lex),
            l_max=l_max,
            normalization=NormalizationConfig(
                fold_fullwidth=bool(fold),
                digit_class=bool(digit),
                latin_class=bool(latin),
            ),
        )
    except Exception as exc:
        raise ModelFormatError(f"bad template block: {exc}") from exc

    n_feats = rd.u32()
    strings = [rd.string() for _ in range(n_feats)]
    try:
        index = FeatureIndex.from_strings(strings, frozen=True)
    except Exception as exc:
        raise ModelFormatError(f"bad feature table: {exc}") from exc

    t = scheme.size
    weights = np.frombuffer(rd.take(8 * n_feats * t), dtype="<f8").reshape(n_feats, t)
    trans = np.frombuffer(rd.take(8 * t * t), dtype="<f8").reshape(t, t)
    provenance = rd.string()
    if not rd.done():
        raise ModelFormatError("model file has trailing bytes after the last record")
    try:
        prov_dict = json.loads(provenance) if provenance else {}
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"bad provenance block: {exc}") from exc

    model = CrfModel(
        weights.astype(np.float64),
        trans.astype(np.float64),
        scheme,
        index,
        tcfg,
    )
    model.provenance = prov_dict
    return model


def dump_text(model: CrfModel, path, min_abs: float = 0.0):
    """Write a human-readable weight listing.

    Emission lines cover nonzero weights with magnitude at least *min_abs*,
    ordered by feature ID then tag ID; transitions follow, masked entries
    marked as structurally forbidden.
    """
    scheme = model.scheme
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# features: {model.index.count}\n")
        fh.write(f"# tags: {scheme.size}\n")
        fh.write(f"# min_abs: {min_abs!r}\n")
        for fid in range(model.index.count):
            row = model.weights[fid]
            for t in range(scheme.size):
                w = row[t]
                if w != 0.0 and abs(w) >= min_abs:
                    fh.write(
                        f"{model.index.string(fid)}\t{scheme.tag_name(t)}\t{w:.17g}\n"
                    )
        fh.write("# transitions\n")
        for a in range(scheme.size):
            for b in range(scheme.size):
                if not scheme.mask[a, b]:
                    fh.write(f"{scheme.tag_name(a)}\t{scheme.tag_name(b)}\t(forbidden)\n")
                else:
                    fh.write(
                        f"{scheme.tag_name(a)}\t{scheme.tag_name(b)}\t"
                        f"{model.transitions[a, b]:.17g}\n"
                    )


def resolve_model(spec: str, model_dir: Optional[str] = None) -> str:
    """Turn a --model argument into a file path.

    An existing path wins.  Otherwise the argument is treated as a model
    name looked up as <dir>/<name>.model, where <dir> comes from the
    explicit argument or the SEGKIT_MODEL_DIR environment variable.
    """
    if os.path.exists(spec):
        return spec
    if os.sep in spec or (os.altsep and os.altsep in spec):
        raise UnknownModelError(f"model file not found: {spec}")
    directory = model_dir or os.environ.get(MODEL_DIR_ENV)
    if directory:
        candidate = os.path.join(directory, spec + ".model")
        if os.path.exists(candidate):
            return candidate
    known = ", ".join(KNOWN_MODEL_NAMES)
    if spec in KNOWN_MODEL_NAMES:
        raise UnknownModelError(
            f"model {spec!r} is known but no file {spec}.model was found"
            + (f" under {directory}" if directory else f"; set {MODEL_DIR_ENV} or pass a directory")
        )
    raise UnknownModelError(f"unknown model {spec!r}; known names: {known}")
