"""Objective separation quality and detection scoring.

Separation quality follows the time-invariant-gain decomposition: the
estimate is projected onto the target reference (s_target), onto the span
of all references (whose surplus over s_target is e_interf), and the
remainder is e_artif. SDR/SIR/SAR are energy ratios of those parts; RQF is
the plain signal-to-error energy ratio. All ratios are reported in dB and
clamped to the +/-200 dB sentinel so file outputs stay finite and sortable.

Detection scoring is two-class (voice vs music): recall and precision are
computed per class, averaged, and combined by the harmonic mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .audio import AudioSignal

DB_SENTINEL = 200.0


@dataclass
class SeparationScore:
    label: str
    rqf_db: float
    sdr_db: float
    sir_db: float
    sar_db: float

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "rqf_db": self.rqf_db,
            "sdr_db": self.sdr_db,
            "sir_db": self.sir_db,
            "sar_db": self.sar_db,
        }


@dataclass
class DetectionScore:
    av_rec: float
    av_prec: float
    f_meas: float
    per_class: dict

    def as_dict(self) -> dict:
        return {
            "av_rec": self.av_rec,
            "av_prec": self.av_prec,
            "f_meas": self.f_meas,
            "per_class": self.per_class,
        }


def _ratio_db(num: float, den: float) -> float:
    if num <= 0.0 and den <= 0.0:
        return 0.0
    if den <= 0.0:
        return DB_SENTINEL
    if num <= 0.0:
        return -DB_SENTINEL
    return float(np.clip(10.0 * np.log10(num / den), -DB_SENTINEL, DB_SENTINEL))


def _as_samples(x) -> np.ndarray:
    return x.samples if isinstance(x, AudioSignal) else np.asarray(x, dtype=np.float64)


def rqf(s, s_hat) -> float:
    """Reconstruction quality factor 10*log10(||s||^2 / ||s - s_hat||^2) in dB."""
    s = _as_samples(s)
    s_hat = _as_samples(s_hat)
    if s.size != s_hat.size:
        raise ValueError(f"length mismatch: {s.size} vs {s_hat.size}")
    ref_energy = float(np.sum(s ** 2))
    if ref_energy == 0.0:
        raise ValueError("reference signal is zero")
    return _ratio_db(ref_energy, float(np.sum((s - s_hat) ** 2)))


def bss_eval(s_hat, references: list, target_index: int) -> tuple[float, float, float]:
    """(SDR, SIR, SAR) of an estimate against reference sources, in dB.

    The decomposition is orthogonal: s_hat = s_target + e_interf + e_artif
    with s_target the projection onto the target reference, e_interf the
    extra component lying in the span of all references, and e_artif the
    out-of-span remainder.
    """
    s_hat = _as_samples(s_hat)
    refs = [_as_samples(r) for r in references]
    for r in refs:
        if r.size != s_hat.size:
            raise ValueError("estimate and references must share one length")
        if not np.any(r):
            raise ValueError("references must be non-zero")
    if not 0 <= target_index < len(refs):
        raise ValueError(f"target_index {target_index} out of range for {len(refs)} references")

    r_mat = np.stack(refs, axis=1)
    gram = r_mat.T @ r_mat
    if np.linalg.matrix_rank(gram) < len(refs):
        raise ValueError("references are linearly dependent")

    target = refs[target_index]
    s_target = (s_hat @ target) / (target @ target) * target
    in_span = r_mat @ np.linalg.solve(gram, r_mat.T @ s_hat)
    e_interf = in_span - s_target
    e_artif = s_hat - in_span

    target_energy = float(np.sum(s_target ** 2))
    interf_energy = float(np.sum(e_interf ** 2))
    artif_energy = float(np.sum(e_artif ** 2))
    sdr = _ratio_db(target_energy, interf_energy + artif_energy)
    sir = _ratio_db(target_energy, interf_energy)
    sar = _ratio_db(target_energy + interf_energy, artif_energy)
    return sdr, sir, sar


def score_separation(estimates: list, references: list, labels: list[str]) -> list[SeparationScore]:
    """Score each estimate against its same-index reference."""
    if not len(estimates) == len(references) == len(labels):
        raise ValueError("estimates, references and labels must align")
    scores = []
    for i, label in enumerate(labels):
        sdr, sir, sar = bss_eval(estimates[i], references, i)
        scores.append(
            SeparationScore(
                label=label,
                rqf_db=rqf(references[i], estimates[i]),
                sdr_db=sdr,
                sir_db=sir,
                sar_db=sar,
            )
        )
    return scores


def format_score_table(scores: list[SeparationScore]) -> str:
    """Aligned plain-text table of separation scores."""
    header = f"{'source':<12}{'RQF (dB)':>10}{'SDR (dB)':>10}{'SIR (dB)':>10}{'SAR (dB)':>10}"
    rows = [header, "-" * len(header)]
    for s in scores:
        rows.append(
            f"{s.label:<12}{s.rqf_db:>10.2f}{s.sdr_db:>10.2f}{s.sir_db:>10.2f}{s.sar_db:>10.2f}"
        )
    return "\n".join(rows)


def _class_scores(pred: np.ndarray, truth: np.ndarray):
    true_pos = int(np.sum(pred & truth))
    n_truth = int(np.sum(truth))
    n_pred = int(np.sum(pred))
    # a class absent from the truth scores recall 1 only when it is also
    # absent from the predictions; otherwise it is excluded from the average
    if n_truth == 0:
        recall = 1.0 if n_pred == 0 else None
    else:
        recall = true_pos / n_truth
    if n_pred == 0:
        precision = 1.0 if n_truth == 0 else None
    else:
        precision = true_pos / n_pred
    return recall, precision


def detection_metrics(pred, truth) -> DetectionScore:
    """Class-averaged recall/precision and their harmonic-mean F-measure."""
    pred = np.asarray(pred, dtype=bool)
    truth = np.asarray(truth, dtype=bool)
    if pred.size != truth.size:
        raise ValueError(f"frame count mismatch: {pred.size} vs {truth.size}")

    per_class = {}
    for name, p, t in (("voice", pred, truth), ("music", ~pred, ~truth)):
        recall, precision = _class_scores(p, t)
        per_class[name] = {"recall": recall, "precision": precision}

    recalls = [c["recall"] for c in per_class.values() if c["recall"] is not None]
    precisions = [c["precision"] for c in per_class.values() if c["precision"] is not None]
    av_rec = float(np.mean(recalls)) if recalls else 0.0
    av_prec = float(np.mean(precisions)) if precisions else 0.0
    f_meas = f_measure(av_rec, av_prec)
    return DetectionScore(av_rec=av_rec, av_prec=av_prec, f_meas=f_meas, per_class=per_class)


def f_measure(av_rec: float, av_prec: float) -> float:
    """Harmonic mean of the class-averaged recall and precision."""
    if av_rec + av_prec == 0.0:
        return 0.0
    return 2.0 * av_rec * av_prec / (av_rec + av_prec)
