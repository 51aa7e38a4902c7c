"""Command-line entry points: prepare, train, eval, generate, serve."""
from __future__ import annotations

import argparse
import os
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import engine
from .benchmark import DEFAULT_LENGTHS, InterpolationMethod, ModelMethod, ZeroVelocityMethod, run_benchmark
from .bvh import BvhError, parse_bvh, write_bvh
from .configfile import ConfigError, DataConfig, RunConfig, parse_config
from .model.config import GeneratorConfig, TrainingParams
from .model.training import train
from .motionops import with_extracted_contacts
from .service import generate_transition
from .skeleton import MotionClip
from .synthetic import make_gait_corpus
from .weightsio import (
    container_from_trainer,
    generator_from_container,
    load_weights,
    save_weights,
    trainer_from_container,
)
from .windows import WindowSpec, compute_norm_stats, make_windows, write_manifest

ADDRESS_ENV = "INBETWEEN_ADDRESS"


class CliError(RuntimeError):
    pass


def parse_clip_labels(stem: str):
    """Subject/action from a BVH filename.

    Supports `<subject>_<action>_*` and the `<action>_subject<k>` convention:
    any token matching subject<digits> wins as the subject.
    """
    parts = stem.split("_")
    for i, token in enumerate(parts):
        if re.fullmatch(r"[Ss]ubject\d+", token):
            action = "_".join(parts[:i] + parts[i + 1 :])
            return token.lower(), action
    subject = parts[0] if parts else ""
    action = parts[1] if len(parts) > 1 else ""
    return subject, action


def load_bvh_dir(data_dir, contact_threshold=0.2):
    """Load every .bvh under data_dir.

    Subject and action come from the filename (see parse_clip_labels);
    contacts are derived from foot velocities when the skeleton exposes feet.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise CliError(f"data directory not found: {data_dir}")
    files = sorted(data_dir.glob("*.bvh"))
    if not files:
        raise CliError(f"no .bvh files in {data_dir}")
    clips, sources = [], []
    for path in files:
        try:
            skeleton, clip = parse_bvh(path.read_text())
        except BvhError as e:
            raise CliError(f"{path.name}: {e}") from None
        clip.subject, clip.action = parse_clip_labels(path.stem)
        if skeleton.foot_joints is not None:
            clip = with_extracted_contacts(clip, contact_threshold)
        clips.append(clip)
        sources.append(path.name)
    return clips, sources


def split_train_test(clips, test_subject):
    train_clips = [c for c in clips if c.subject != test_subject]
    test_clips = [c for c in clips if c.subject == test_subject]
    return train_clips, test_clips


def cmd_prepare(args):
    if args.synthetic:
        out = Path(args.data)
        out.mkdir(parents=True, exist_ok=True)
        clips = make_gait_corpus(args.synthetic, seed=args.seed)
        for i, clip in enumerate(clips):
            path = out / f"{clip.subject}_{clip.action}_{i:04d}.bvh"
            path.write_text(write_bvh(clip))
        print(f"wrote {len(clips)} synthetic clips to {out}")
    clips, sources = load_bvh_dir(args.data)
    manifest = write_manifest(clips, sources)
    Path(args.manifest).write_text(manifest)
    total = sum(len(c) for c in clips)
    print(f"manifest: {args.manifest} ({len(clips)} clips, {total} frames)")
    return 0


def _read_config(path) -> RunConfig:
    if path is None:
        return RunConfig(model=GeneratorConfig(), training=TrainingParams(), data=DataConfig())
    try:
        return parse_config(Path(path).read_text())
    except FileNotFoundError:
        raise CliError(f"config file not found: {path}") from None
    except ConfigError as e:
        raise CliError(str(e)) from None


def cmd_train(args):
    run = _read_config(args.config)
    engine.set_default_dtype(np.float32 if run.precision == "float32" else np.float64)
    clips, _ = load_bvh_dir(args.data, run.data.contact_threshold)
    train_clips, _ = split_train_test(clips, run.data.test_subject)
    if not train_clips:
        raise CliError("no training clips after subject split")
    skeleton = train_clips[0].skeleton
    joint_count = skeleton.joint_count
    if run.model.joint_count != joint_count:
        print(f"adjusting joint_count {run.model.joint_count} -> {joint_count} (from data)")
        run.model.joint_count = joint_count
    if skeleton.foot_joints is None and run.model.include_contacts:
        print("skeleton has no feet; disabling contact channels")
        run.model.include_contacts = False
    spec = WindowSpec(run.data.window_length, run.data.stride)
    future = max(run.data.window_length - run.data.t_past - run.model.p_max, 1)
    windows, skipped = make_windows(train_clips, spec, t_past=run.data.t_past, future_frames=future)
    if skipped:
        print(f"skipped {skipped} clips shorter than {spec.window_length} frames")
    if not windows:
        raise CliError("no training windows")
    print(f"{len(windows)} training windows; computing statistics")
    stats = compute_norm_stats(windows)

    out_path = Path(args.out)
    checkpoint_path = out_path.with_suffix(out_path.suffix + ".ckpt")
    log_path = Path(args.log) if args.log else out_path.with_suffix(".log")
    state = None
    log_mode = "w"
    if args.resume:
        state = trainer_from_container(load_weights(args.resume), run.training)
        log_mode = "a"
        print(f"resumed from {args.resume} at iteration {state.iteration}")

    started = time.time()
    with open(log_path, log_mode) as log_file:
        def sink(line):
            log_file.write(line + "\n")

        def checkpoint(st):
            container = container_from_trainer(st, skeleton, stats, include_optimizer=True)
            save_weights(checkpoint_path, container)

        def progress(record):
            it, lq, lr, lp, lc, lg, ld = record
            print(f"it {it:6d}  quat {lq:.4f}  root {lr:.4f}  pos {lp:.4f}  "
                  f"contacts {lc:.4f}  gen {lg:.4f}  disc {ld:.4f}", flush=True)

        state = train(run.model, windows, run.training, state=state, log_sink=sink,
                      checkpoint_fn=checkpoint, critic_hidden=run.critic_hidden,
                      progress_fn=progress)
    container = container_from_trainer(
        state, skeleton, stats, include_optimizer=False,
        extra_meta={"precision": run.precision, "contact_threshold": run.data.contact_threshold},
    )
    fingerprint = save_weights(out_path, container)
    print(f"trained {state.iteration} iterations in {time.time() - started:.0f}s")
    print(f"weights: {out_path} (fingerprint {fingerprint[:16]}...)")
    print(f"log: {log_path}")
    return 0


def cmd_eval(args):
    run = _read_config(args.config)
    lengths = tuple(int(v) for v in args.lengths.split(","))
    clips, _ = load_bvh_dir(args.data, run.data.contact_threshold)
    train_clips, test_clips = split_train_test(clips, run.data.test_subject)
    if not test_clips:
        raise CliError(f"no clips for test subject {run.data.test_subject!r}")
    eval_window = run.data.t_past + max(lengths) + 1
    test_windows, _ = make_windows(test_clips, WindowSpec(eval_window, run.data.eval_stride),
                                   t_past=run.data.t_past)
    if not test_windows:
        raise CliError("no evaluation windows")

    if args.baseline:
        method = InterpolationMethod() if args.baseline == "interpolation" else ZeroVelocityMethod()
        spec = WindowSpec(run.data.window_length, run.data.stride)
        future = max(run.data.window_length - run.data.t_past - run.model.p_max, 1)
        train_windows, _ = make_windows(train_clips, spec, t_past=run.data.t_past, future_frames=future)
        if not train_windows:
            raise CliError("baseline evaluation needs training windows for statistics")
        stats = compute_norm_stats(train_windows)
    else:
        if args.variation and args.variation > 0:
            raise CliError("noise off for quantitative evaluation: variation must be 0")
        container = load_weights(args.weights)
        stats = container.norm_stats
        if stats is None:
            raise CliError("weights container carries no normalization statistics")
        generator = generator_from_container(container)
        method = ModelMethod(generator, name="model")

    report = run_benchmark(method, test_windows, stats, lengths=lengths)
    out = Path(args.out)
    out.with_suffix(".tsv").write_text(report.to_tsv())
    out.with_suffix(".txt").write_text(report.to_table())
    print(report.to_table())
    print(f"report: {out.with_suffix('.tsv')} and {out.with_suffix('.txt')}")
    return 0


def cmd_generate(args):
    container = load_weights(args.weights)
    generator = generator_from_container(container)
    skeleton = container.skeleton
    t_past = container.config.t_past
    try:
        file_skel, clip = parse_bvh(Path(args.input).read_text())
    except BvhError as e:
        raise CliError(f"{args.input}: {e}") from None
    if file_skel.joint_count != skeleton.joint_count:
        raise CliError(
            f"input skeleton has {file_skel.joint_count} joints, model expects {skeleton.joint_count}"
        )
    if len(clip) < t_past + 1:
        raise CliError(f"input must supply at least {t_past} context frames plus a target")
    past = clip.frames[:t_past]
    target = clip.frames[-1]
    if args.length > container.config.p_max:
        print(f"warning: length {args.length} beyond trained maximum "
              f"{container.config.p_max}; generalization quality may degrade")
    from .motionops import CONTACT_SPEED_THRESHOLD

    frames, contacts, _ = generate_transition(
        generator, skeleton, past, target, args.length,
        variation=args.variation, seed=args.seed, apply_ik=args.apply_ik,
        contact_threshold=float(container.meta.get("contact_threshold", CONTACT_SPEED_THRESHOLD)),
    )
    out_frames = past + frames + [target]
    out_clip = MotionClip(file_skel, out_frames, fps=clip.fps, subject=clip.subject)
    Path(args.out).write_text(write_bvh(out_clip))
    print(f"wrote {len(out_frames)} frames ({args.length} generated) to {args.out}")
    return 0


def cmd_serve(args):
    import uvicorn

    from .service import create_app

    container = load_weights(args.weights)
    app = create_app(container)
    address = args.address or os.environ.get(ADDRESS_ENV, "127.0.0.1:8303")
    host, _, port = address.partition(":")
    print(f"serving model {container.fingerprint[:16]}... on {host}:{port or 8303}")
    uvicorn.run(app, host=host, port=int(port or 8303), log_level="warning")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="inbetween",
                                     description="Motion in-betweening toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="index a BVH directory (optionally generate a synthetic corpus)")
    p.add_argument("--data", required=True, help="BVH directory")
    p.add_argument("--manifest", required=True, help="output manifest path")
    p.add_argument("--synthetic", type=int, default=0, metavar="N",
                   help="generate N synthetic gait clips into --data first")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train a transition generator")
    p.add_argument("--config", help="config file (defaults used when omitted)")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="output weights path")
    p.add_argument("--resume", help="checkpoint to resume from")
    p.add_argument("--log", help="training log path (default: alongside weights)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the transition benchmark")
    p.add_argument("--config", help="config file")
    p.add_argument("--data", required=True)
    p.add_argument("--weights", help="weights container to evaluate")
    p.add_argument("--baseline", choices=["interpolation", "zero-velocity"])
    p.add_argument("--lengths", default=",".join(str(v) for v in DEFAULT_LENGTHS))
    p.add_argument("--variation", type=float, default=0.0)
    p.add_argument("--out", default="benchmark", help="report path prefix")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("generate", help="fill the gap between context frames and a target keyframe")
    p.add_argument("--weights", required=True)
    p.add_argument("--input", required=True, help="BVH with >= t_past context frames; last frame is the target")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--variation", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--apply-ik", action="store_true", help="contact-driven foot IK")
    p.add_argument("--out", required=True, help="output BVH path")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="run the HTTP inference service")
    p.add_argument("--weights", required=True)
    p.add_argument("--address", help=f"host:port (or ${ADDRESS_ENV})")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "eval" and not args.baseline and not args.weights:
        parser.error("eval needs --weights or --baseline")
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except Exception as e:  # keep exits nonzero on any failure
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
