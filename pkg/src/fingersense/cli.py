"""Command-line interface tying the library together.

Five subcommands cover the full workflow:

- ``render``      one synthetic contact image pair plus its ground truth
- ``dataset``     the 56-image contact protocol with manifest
- ``localize``    run the detection pipeline over a dataset and report errors
- ``calibrate``   fit camera intrinsics from a correspondence CSV
- ``blocksworld`` Monte-Carlo grasping statistics for the three policies

Every command accepts ``--config FILE`` (JSON, see config.py) and is
deterministic given its flags: all randomness flows from ``--seed`` (default
0), never from the clock.  Exit status is 0 exactly when the command
completed with every validation passing.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .blocksworld import (
    HARDWARE_TABLE,
    PolicyKind,
    exact_metrics,
    metrics_to_json_dict,
    run_batch,
)
from .calibration import fit_intrinsics, load_correspondences, solve_alpha
from .config import SessionConfig, load_config
from .geometry import ContactPose, SurfacePoint, classify_surface_point, pose_to_contact_point
from .imaging import (
    HARDWARE_ERRORS_BY_OBJECT,
    HARDWARE_ERRORS_BY_POSE,
    ErrorRecord,
    GroupStats,
    TactileImage,
    aggregate_errors,
    detect_blobs,
    localization_error,
    localize_contact,
    smooth,
    subtract_reference,
)
from .pgm import read_pgm, write_pgm
from .render import (
    OBJECT_ORDER,
    default_indenter,
    generate_protocol_dataset,
    load_manifest,
    render_contact,
    render_reference,
)


def _session_config(args: argparse.Namespace) -> SessionConfig:
    if args.config is None:
        return SessionConfig()
    return load_config(args.config)


def _fmt(value: float) -> str:
    """Full-precision, byte-stable decimal text for CSV cells."""
    return repr(float(value))


# ---------------------------------------------------------------------------
# render


def cmd_render(args: argparse.Namespace) -> int:
    config = _session_config(args)
    if args.rotation is not None:
        pose = ContactPose.rotation(args.rotation)
    else:
        pose = ContactPose.translation(args.translation)
    truth = pose_to_contact_point(pose, config.geometry)  # validates the pose
    indenter = default_indenter(args.object, pose, config.geometry)

    out_dir = Path(args.out if args.out is not None else config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_pgm(out_dir / "reference.pgm", render_reference(config.geometry, config.intrinsics).pixels)
    write_pgm(out_dir / "contact.pgm", render_contact(indenter, config.geometry, config.intrinsics).pixels)

    print(
        json.dumps(
            {
                "object": args.object,
                "pose_kind": pose.kind.value,
                "pose_value": pose.value,
                "x_mm": truth.x,
                "y_mm": truth.y,
                "z_mm": truth.z,
            }
        )
    )
    return 0


# ---------------------------------------------------------------------------
# dataset


def cmd_dataset(args: argparse.Namespace) -> int:
    config = _session_config(args)
    out_dir = Path(args.out_dir if args.out_dir is not None else config.out_dir)
    noise = args.noise if args.noise is not None else config.noise_sigma
    generate_protocol_dataset(
        out_dir, config.geometry, config.intrinsics, noise_sigma=noise, seed=args.seed
    )
    print(str(out_dir / "manifest.json"))
    return 0


# ---------------------------------------------------------------------------
# localize


def _write_group_csv(
    path: Path, key_column: str, stats: list[GroupStats], hardware: dict[str, tuple[float, float]]
) -> None:
    lines = [f"{key_column},mean_mm,std_mm,count,hardware_mean_mm,hardware_std_mm"]
    for s in stats:
        hw = hardware.get(s.label)
        hw_mean, hw_std = (_fmt(hw[0]), _fmt(hw[1])) if hw else ("", "")
        lines.append(f"{s.label},{_fmt(s.mean)},{_fmt(s.std)},{s.count},{hw_mean},{hw_std}")
    path.write_text("\n".join(lines) + "\n")


def cmd_localize(args: argparse.Namespace) -> int:
    config = _session_config(args)
    manifest_path = Path(args.manifest)
    manifest = load_manifest(manifest_path)
    if not manifest.entries:
        raise ValueError(f"manifest {manifest_path} lists no entries")
    base = manifest_path.parent

    references: dict[str, TactileImage] = {}
    records: list[ErrorRecord] = []
    rows = ["object,pose_kind,pose_value,error_mm"]
    for entry in manifest.entries:
        try:
            if entry.reference not in references:
                references[entry.reference] = TactileImage(read_pgm(base / entry.reference))
            reference = references[entry.reference]
            frame = TactileImage(read_pgm(base / entry.frame))
            diff = smooth(subtract_reference(reference, frame), config.sigma_px)
            blobs = detect_blobs(diff, config.threshold, config.min_area_px)
            if not blobs:
                raise ValueError("no contact detected")
            estimate = localize_contact(blobs[0], config.intrinsics, config.geometry)
            truth = SurfacePoint(
                *entry.truth_mm, classify_surface_point(entry.truth_mm, config.geometry)
            )
            error = localization_error(estimate, truth)
        except (OSError, ValueError) as exc:
            print(f"warning: {entry.frame}: {exc}", file=sys.stderr)
            rows.append(f"{entry.object_label},{entry.pose.kind.value},{_fmt(entry.pose.value)},nan")
            continue
        records.append(ErrorRecord(entry.object_label, entry.pose, error))
        rows.append(
            f"{entry.object_label},{entry.pose.kind.value},{_fmt(entry.pose.value)},{_fmt(error)}"
        )

    (base / "errors.csv").write_text("\n".join(rows) + "\n")
    if not records:
        print("error: no entry could be localized", file=sys.stderr)
        return 1

    by_pose, by_object = aggregate_errors(records)
    _write_group_csv(base / "by_pose.csv", "pose", by_pose, HARDWARE_ERRORS_BY_POSE)
    _write_group_csv(base / "by_object.csv", "object", by_object, HARDWARE_ERRORS_BY_OBJECT)

    mean_error = sum(r.error_mm for r in records) / len(records)
    print(
        json.dumps(
            {
                "n_entries": len(manifest.entries),
                "n_detected": len(records),
                "mean_error_mm": mean_error,
            }
        )
    )
    return 0


# ---------------------------------------------------------------------------
# calibrate


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _session_config(args)
    correspondences = load_correspondences(args.csv, config.geometry)
    alpha_single = solve_alpha(correspondences[0], config.intrinsics.cx, config.intrinsics.cy)
    result = fit_intrinsics(correspondences, config.intrinsics)
    print(
        json.dumps(
            {
                "alpha_single_point_px": alpha_single,
                "alpha_px": result.intrinsics.alpha,
                "cx_px": result.intrinsics.cx,
                "cy_px": result.intrinsics.cy,
                "rms_residual_px": result.rms_residual,
                "n_correspondences": len(correspondences),
            }
        )
    )
    return 0


# ---------------------------------------------------------------------------
# blocksworld


def cmd_blocksworld(args: argparse.Namespace) -> int:
    kinds = (
        [PolicyKind.CONTROL, PolicyKind.RG, PolicyKind.RGTR]
        if args.policy == "all"
        else [PolicyKind(args.policy)]
    )
    simulated = {}
    for kind in kinds:
        metrics = run_batch(kind, args.n_boards, seed=args.seed)
        simulated[kind] = metrics
        print(json.dumps(metrics_to_json_dict(metrics, kind, args.seed)))

    if args.policy == "all":
        lines = [
            "policy,failure_rate,attempts_per_block,collisions_per_block,"
            "oracle_failure_rate,oracle_attempts_per_block,oracle_collisions_per_block,"
            "hardware_failure_rate,hardware_attempts_per_block,hardware_collisions_per_block"
        ]
        for kind in kinds:
            sim = simulated[kind]
            oracle = exact_metrics(kind)
            hw = HARDWARE_TABLE[kind.value]
            cells = [
                kind.value,
                _fmt(sim.failure_rate),
                _fmt(sim.attempts_per_block),
                _fmt(sim.collisions_per_block),
                _fmt(oracle.failure_rate),
                _fmt(oracle.attempts_per_block),
                _fmt(oracle.collisions_per_block),
                _fmt(hw[0]),
                _fmt(hw[1]),
                _fmt(hw[2]),
            ]
            lines.append(",".join(cells))
        print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fingersense",
        description="Simulate, calibrate, and evaluate a finger-shaped tactile sensor.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, func, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="JSON configuration file")
        p.set_defaults(func=func)
        return p

    p = add("render", cmd_render, "render one contact image pair and print ground truth")
    p.add_argument("--object", required=True, choices=OBJECT_ORDER)
    pose = p.add_mutually_exclusive_group(required=True)
    pose.add_argument("--rotation", type=float, default=None, help="tip rotation (radians)")
    pose.add_argument("--translation", type=float, default=None, help="side offset (mm)")
    p.add_argument("--out", default=None, help="output directory (default from config)")

    p = add("dataset", cmd_dataset, "render the full contact protocol with manifest")
    p.add_argument("--out-dir", default=None, help="output directory (default from config)")
    p.add_argument("--noise", type=float, default=None, help="pixel noise sigma (default 0)")
    p.add_argument("--seed", type=int, default=0)

    p = add("localize", cmd_localize, "localize every manifest entry and tabulate errors")
    p.add_argument("--manifest", required=True, help="dataset manifest JSON")

    p = add("calibrate", cmd_calibrate, "fit intrinsics from a u,v,x,y,z CSV")
    p.add_argument("csv", help="correspondence CSV with header u,v,x,y,z")

    p = add("blocksworld", cmd_blocksworld, "Monte-Carlo grasping statistics")
    p.add_argument("--policy", required=True, choices=["control", "rg", "rgtr", "all"])
    p.add_argument("-n", "--n-boards", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
