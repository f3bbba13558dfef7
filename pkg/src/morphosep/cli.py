"""Command-line interface.

Subcommands:

* ``synth``        render a synthetic mixture, its references and truth;
* ``separate``     run a separation method on a WAV mixture;
* ``train-kernel`` learn a source kernel from an isolated WAV;
* ``detect``       per-frame singing-voice detection, CSV out;
* ``eval-bss``     score estimates against references (JSON + table);
* ``eval-vad``     score a detection CSV against truth segments (JSON).

The default output directory is ``$MORPHOSEP_OUT_DIR`` (falling back to the
current directory); ``--figures`` renders PNG reports next to the outputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .kam import binarize_kernel, train_kernel
from .masking import SOURCE_ROLES
from .metrics import detection_metrics, format_score_table, score_separation
from .pipeline import METHODS, detect_pipeline, separate
from .rpca import RpcaConfig
from .stft import StftConfig, stft
from .synth import COMPONENTS, SynthRecipe, synth_mixture
from .tv import TvConfig
from .vad import VadConfig, frame_truth


def _out_dir(args) -> Path:
    out = Path(args.out_dir) if args.out_dir else io.default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_separation_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--alpha", type=float, default=2.0, help="Wiener mask exponent")
    p.add_argument("--iters", type=int, default=None,
                   help="iteration override for the chosen method")
    p.add_argument("--kernels", nargs="+", default=None, metavar="FILE",
                   help="kernel files for kam-cust")
    p.add_argument("--references", nargs="+", default=None, metavar="WAV",
                   help="isolated reference WAVs for the oracle method")
    p.add_argument("--labels", nargs="+", default=None, choices=SOURCE_ROLES,
                   help="source roles for the oracle references")
    p.add_argument("--hpss", action="store_true",
                   help="pre-split the percussive part (rpca / kam-repet)")
    p.add_argument("--repet-period", type=float, default=None, metavar="SECONDS",
                   help="repetition period for kam-repet (estimated when omitted)")
    p.add_argument("--rpca-lambda", type=float, default=None,
                   help="sparsity weight override (default 1/sqrt(max(T,F)))")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--figures", action="store_true", help="render PNG reports")


def _separation_kwargs(args, sample_rate: int) -> dict:
    kwargs = {"alpha": args.alpha, "hpss": args.hpss}
    if args.repet_period is not None:
        kwargs["repet_period_s"] = args.repet_period
    if args.kernels:
        loaded = []
        for path in args.kernels:
            kernel, threshold = io.load_kernel(path)
            if not kernel.is_binary:
                if threshold is None:
                    raise SystemExit(f"kernel file {path} is real-valued and has no threshold")
                kernel = binarize_kernel(kernel, threshold)
            loaded.append(kernel)
        kwargs["kernels"] = loaded
    if args.references:
        kwargs["references"] = [io.load_wav(p) for p in args.references]
        if args.labels:
            kwargs["labels"] = args.labels
    tv_kwargs = {}
    rpca_kwargs = {}
    if args.iters is not None:
        tv_kwargs["n_iter"] = args.iters
        rpca_kwargs["n_iter"] = args.iters
        kwargs["kam_iter"] = args.iters
    if args.rpca_lambda is not None:
        rpca_kwargs["lam"] = args.rpca_lambda
    kwargs["tv_cfg"] = TvConfig(**tv_kwargs)
    kwargs["rpca_cfg"] = RpcaConfig(**rpca_kwargs)
    return kwargs


def _cmd_synth(args) -> int:
    out = _out_dir(args)
    recipe = SynthRecipe(
        components=tuple(args.components.split(",")),
        duration=args.duration,
        sample_rate=args.rate,
        seed=args.seed,
    )
    result = synth_mixture(recipe)
    io.save_wav(out / "mixture.wav", result.mixture)
    for name, ref in zip(result.component_names, result.references):
        io.save_wav(out / f"ref_{name}.wav", ref)
    io.save_segments(out / "truth.txt", result.voice_segments)
    meta = {
        "components": result.component_names,
        "labels": result.labels,
        "duration": recipe.duration,
        "sample_rate": recipe.sample_rate,
        "seed": recipe.seed,
    }
    io.save_scores(out / "recipe.json", meta)
    print(f"wrote mixture + {len(result.references)} references to {out}")
    return 0


def _cmd_separate(args) -> int:
    out = _out_dir(args)
    x = io.load_wav(args.mixture)
    kwargs = _separation_kwargs(args, x.sample_rate)
    result = separate(x, args.method, **kwargs)
    stem = Path(args.mixture).stem
    for label, sig in zip(result.labels, result.signals):
        io.save_wav(out / f"{stem}_{label}.wav", sig)
    print(f"wrote {len(result.signals)} sources to {out}")
    if args.figures:
        from .report import save_spectrogram_figure

        mix_stft = stft(x, StftConfig(sample_rate=x.sample_rate)) \
            if args.method != "tv" else result.stfts[0].copy_with(
                sum(s.data for s in result.stfts))
        save_spectrogram_figure(
            out / f"{stem}_spectrograms.png",
            [mix_stft, *result.stfts],
            ["mixture", *result.labels],
        )
        print(f"wrote {out / f'{stem}_spectrograms.png'}")
    return 0


def _cmd_train_kernel(args) -> int:
    source = io.load_wav(args.source)
    kernel = train_kernel(
        stft(source, StftConfig(sample_rate=source.sample_rate)),
        args.h, args.w, label=args.label,
    )
    io.save_kernel(args.output, kernel, threshold=args.gamma_thr)
    print(f"trained {args.h}x{args.w} kernel -> {args.output}")
    if args.figures:
        from .report import save_kernel_figure

        binary = binarize_kernel(kernel, args.gamma_thr)
        save_kernel_figure(
            Path(args.output).with_suffix(".png"),
            [kernel, binary],
            [f"trained ({args.label})", f"binarized at {args.gamma_thr}"],
        )
    return 0


def _cmd_detect(args) -> int:
    out = _out_dir(args)
    entries = (
        io.load_manifest(args.manifest)
        if args.manifest
        else [{"mixture": args.mixture}]
    )
    if not entries:
        raise SystemExit("empty manifest")
    base = Path(args.manifest).parent if args.manifest else Path(".")
    for entry in entries:
        mix_path = Path(entry["mixture"])
        if args.manifest and not mix_path.is_absolute():
            mix_path = base / mix_path
        x = io.load_wav(mix_path)
        kwargs = _separation_kwargs(args, x.sample_rate)
        if entry.get("references"):
            kwargs["references"] = [
                io.load_wav(p if Path(p).is_absolute() else base / p)
                for p in entry["references"]
            ]
        vad_cfg = VadConfig.for_rate(
            x.sample_rate if args.method != "tv" else kwargs["tv_cfg"].target_rate,
            frame_ms=args.frame_ms,
            step_ms=args.step_ms,
            silence_thr=args.gamma_s,
            voice_thr=args.gamma_v,
        )
        lattice = detect_pipeline(
            x, args.method, vad_cfg=vad_cfg, f0_refine=args.f0_filter, **kwargs
        )
        csv_path = out / f"{mix_path.stem}_detection.csv"
        io.save_detection_csv(csv_path, lattice)
        print(f"wrote {csv_path} ({int(lattice.decision.sum())}/{len(lattice)} voice frames)")
        if args.figures:
            from .report import save_detection_figure

            segments = None
            if entry.get("segments"):
                seg_path = Path(entry["segments"])
                segments = io.load_segments(seg_path if seg_path.is_absolute() else base / seg_path)
            save_detection_figure(
                out / f"{mix_path.stem}_detection.png",
                lattice, voice_thr=args.gamma_v, truth_segments=segments,
            )
    return 0


def _cmd_eval_bss(args) -> int:
    if len(args.estimates) != len(args.references):
        raise SystemExit("need as many estimates as references")
    estimates = [io.load_wav(p) for p in args.estimates]
    references = [io.load_wav(p) for p in args.references]
    labels = args.labels or [Path(p).stem for p in args.estimates]
    scores = score_separation(estimates, references, labels)
    table = format_score_table(scores)
    print(table)
    if args.out:
        io.save_scores(args.out, {"sources": [s.as_dict() for s in scores]})
        Path(args.out).with_suffix(".txt").write_text(table + "\n")
    return 0


def _cmd_eval_vad(args) -> int:
    lattice = io.load_detection_csv(args.detections)
    segments = io.load_segments(args.truth)
    truth = frame_truth(lattice.times, segments)
    score = detection_metrics(lattice.decision, truth)
    print(json.dumps(score.as_dict(), indent=2))
    if args.out:
        io.save_scores(args.out, score.as_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morphosep",
        description="Blind source separation by spectrogram morphological "
                    "filtering, with unsupervised singing-voice detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic mixture with truth")
    p.add_argument("--components", default="vibrato,drone,clicks",
                   help=f"comma list among {','.join(COMPONENTS)}")
    p.add_argument("--duration", type=float, default=8.0)
    p.add_argument("--rate", type=int, default=22050)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("separate", help="separate a WAV mixture")
    p.add_argument("mixture")
    _add_separation_args(p)
    p.set_defaults(func=_cmd_separate)

    p = sub.add_parser("train-kernel", help="learn a kernel from an isolated source")
    p.add_argument("source", help="isolated source WAV")
    p.add_argument("output", help="kernel file to write")
    p.add_argument("--h", type=int, default=19)
    p.add_argument("--w", type=int, default=19)
    p.add_argument("--gamma-thr", type=float, default=0.54)
    p.add_argument("--label", default="other", choices=SOURCE_ROLES)
    p.add_argument("--figures", action="store_true")
    p.set_defaults(func=_cmd_train_kernel)

    p = sub.add_parser("detect", help="per-frame singing-voice detection")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--mixture")
    group.add_argument("--manifest", help="JSONL manifest of mixtures to process")
    _add_separation_args(p)
    p.add_argument("--f0-filter", action="store_true",
                   help="refine the voice estimate around YIN harmonics")
    p.add_argument("--gamma-v", type=float, default=0.5)
    p.add_argument("--gamma-s", type=float, default=1e-4)
    p.add_argument("--frame-ms", type=float, default=371.5)
    p.add_argument("--step-ms", type=float, default=30.0)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("eval-bss", help="score separation against references")
    p.add_argument("--estimates", nargs="+", required=True)
    p.add_argument("--references", nargs="+", required=True)
    p.add_argument("--labels", nargs="+", default=None)
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(func=_cmd_eval_bss)

    p = sub.add_parser("eval-vad", help="score a detection CSV against truth segments")
    p.add_argument("--detections", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--out", default=None, help="JSON output path")
    p.set_defaults(func=_cmd_eval_vad)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
