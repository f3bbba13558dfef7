"""WAV ingestion/export, resampling and the toolkit's file formats.

File formats (all human-diffable, all round-tripping exactly):

* kernel files: one JSON object with label, h, w, threshold, kind
  ("real" or "binary") and the row-major values;
* detection output: CSV with columns center_time_s, energy, vtmr,
  decision (0/1);
* scores: plain JSON records;
* voice-activity truth: one "start_s<TAB>end_s" line per segment;
* manifests: one JSON object per line with keys mixture, references
  (optional list) and segments (optional path).

Outputs are written atomically (temp file + rename). The environment
variable MORPHOSEP_OUT_DIR supplies the CLI's default output directory.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np
from scipy import signal as sps
from scipy.io import wavfile

from .audio import AudioSignal
from .kam import Kernel
from .vad import DetectionLattice

OUT_DIR_ENV = "MORPHOSEP_OUT_DIR"

_PCM_SCALES = {
    np.dtype(np.int16): 32768.0,
    np.dtype(np.int32): 2147483648.0,
}


def default_out_dir() -> Path:
    return Path(os.environ.get(OUT_DIR_ENV, "."))


def _atomic_write(path, writer) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as handle:
            writer(handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_wav(path) -> AudioSignal:
    """Read a WAV file as normalized mono float64 at its native rate.

    Integer PCM is scaled to [-1, 1); float data is taken as-is; stereo and
    multichannel files are averaged across channels.
    """
    try:
        rate, data = wavfile.read(path)
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise ValueError(f"cannot read WAV file {path}: {exc}") from exc

    if data.dtype in _PCM_SCALES:
        samples = data.astype(np.float64) / _PCM_SCALES[data.dtype]
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.floating):
        samples = data.astype(np.float64)
    else:
        raise ValueError(f"unsupported WAV sample format {data.dtype} in {path}")
    if samples.ndim > 1:
        samples = samples.mean(axis=1)
    return AudioSignal(samples=samples, sample_rate=int(rate))


def save_wav(path, x: AudioSignal) -> None:
    """Write a signal as 32-bit float WAV (atomically)."""
    payload = x.samples.astype(np.float32)

    def writer(handle):
        wavfile.write(handle, x.sample_rate, payload)

    _atomic_write(path, writer)


def resample(x: AudioSignal, target_rate: int) -> AudioSignal:
    """Windowed-sinc (polyphase Kaiser) resampling to target_rate."""
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    target_rate = int(target_rate)
    if target_rate == x.sample_rate:
        return AudioSignal(x.samples.copy(), x.sample_rate)
    g = math.gcd(target_rate, x.sample_rate)
    out = sps.resample_poly(x.samples, target_rate // g, x.sample_rate // g)
    return AudioSignal(out, target_rate)


def save_kernel(path, kernel: Kernel, threshold: float | None = None) -> None:
    record = {
        "label": kernel.label,
        "h": kernel.h,
        "w": kernel.w,
        "threshold": threshold,
        "kind": "binary" if kernel.is_binary else "real",
        "values": [float(v) for v in kernel.values.ravel()],
    }
    _atomic_write(path, lambda h: h.write(json.dumps(record).encode()))


def load_kernel(path) -> tuple[Kernel, float | None]:
    """Read a kernel file; returns the kernel and its recorded threshold."""
    with open(path) as handle:
        record = json.load(handle)
    h, w = int(record["h"]), int(record["w"])
    values = np.asarray(record["values"], dtype=np.float64)
    if values.size != h * w:
        raise ValueError(f"kernel file {path}: {values.size} values for a {h}x{w} kernel")
    values = values.reshape(h, w)
    if record["kind"] == "binary" and not np.isin(values, (0.0, 1.0)).all():
        raise ValueError(f"kernel file {path}: binary kind with non-binary values")
    return Kernel(values, record["label"]), record.get("threshold")


def save_detection_csv(path, lattice: DetectionLattice) -> None:
    decision = lattice.decision
    if decision is None:
        decision = np.zeros(len(lattice), dtype=bool)

    def writer(handle):
        rows = ["center_time_s,energy,vtmr,decision"]
        for i in range(len(lattice)):
            rows.append(
                f"{lattice.times[i]!r},{lattice.energy[i]!r},"
                f"{lattice.vtmr[i]!r},{int(decision[i])}"
            )
        handle.write(("\n".join(rows) + "\n").encode())

    _atomic_write(path, writer)


def load_detection_csv(path) -> DetectionLattice:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        rows = list(reader)
    return DetectionLattice(
        times=[float(r["center_time_s"]) for r in rows],
        energy=[float(r["energy"]) for r in rows],
        vtmr=[float(r["vtmr"]) for r in rows],
        decision=[r["decision"] == "1" for r in rows],
    )


def save_scores(path, scores: dict) -> None:
    _atomic_write(path, lambda h: h.write(json.dumps(scores, indent=2).encode()))


def load_scores(path) -> dict:
    with open(path) as handle:
        return json.load(handle)


def save_segments(path, segments: list[tuple[float, float]]) -> None:
    lines = "".join(f"{s!r}\t{e!r}\n" for s, e in segments)
    _atomic_write(path, lambda h: h.write(lines.encode()))


def load_segments(path) -> list[tuple[float, float]]:
    segments = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            start, end = line.split("\t")
            segments.append((float(start), float(end)))
    return segments


def save_manifest(path, entries: list[dict]) -> None:
    lines = "".join(json.dumps(e) + "\n" for e in entries)
    _atomic_write(path, lambda h: h.write(lines.encode()))


def load_manifest(path) -> list[dict]:
    """Read a manifest; every referenced file must exist."""
    base = Path(path).parent
    entries = []
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            entry = json.loads(line)
            paths = [entry["mixture"]]
            paths += entry.get("references", [])
            if entry.get("segments"):
                paths.append(entry["segments"])
            for p in paths:
                resolved = Path(p)
                if not resolved.is_absolute():
                    resolved = base / resolved
                if not resolved.exists():
                    raise FileNotFoundError(f"manifest entry references missing file {p}")
            entries.append(entry)
    return entries
