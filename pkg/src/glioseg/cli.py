"""Command-line interface: evaluate, fuse, preprocess, info, lr-schedule,
analyze-curves."""

from __future__ import annotations

import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .metrics import LesionwiseParams, evaluate_case
from .nifti import NiftiFormatError, parse_header, read_nifti_file, write_nifti_file
from .preprocess import ResamplePlan, infer_brain_mask, resample, resample_labels, zscore_normalize
from .regions import hybrid_fuse
from .report import ReportDocument, TOOL_VERSION, emit_report
from .schedules import TrainingConfig, build_schedule, detect_phases
from .volumes import GridMismatchError, MultiModalScan


def _parse_floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _case_stem(path: Path) -> str:
    name = path.name
    for suffix in (".nii.gz", ".nii"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _nifti_files(directory: Path) -> dict[str, Path]:
    files = sorted(p for p in directory.iterdir() if p.name.endswith((".nii", ".nii.gz")))
    return {_case_stem(p): p for p in files}


@click.group()
@click.version_option(TOOL_VERSION, prog_name="glioseg")
def main():
    """Glioma segmentation evaluation toolkit."""


@main.command()
@click.option("--pred", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True, help="Directory of predicted label maps.")
@click.option("--gt", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True, help="Directory of reference label maps.")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="JSON list of {case_id, gt, pred} overriding stem pairing.")
@click.option("--tolerances", default="0.5,1.0", show_default=True, help="Comma-separated NSD tolerances in mm.")
@click.option("--connectivity", type=click.Choice(["6", "18", "26"]), default="26", show_default=True)
@click.option("--dilation", type=int, default=3, show_default=True, help="Lesion-matching dilation radius in voxels.")
@click.option("--min-lesion-size", type=int, default=0, show_default=True, help="Drop lesions below this voxel count.")
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Concurrent case evaluations.")
@click.option("--figures", type=click.Path(file_okay=False, path_type=Path), default=None, help="Also render summary figures into this directory.")
def evaluate(pred, gt, manifest, tolerances, connectivity, dilation, min_lesion_size, out, fmt, jobs, figures):
    """Score predicted label maps against references, case by case."""
    tols = _parse_floats(tolerances)
    params = LesionwiseParams(
        connectivity=int(connectivity), dilation_radius_vox=dilation, min_lesion_size_vox=min_lesion_size
    )

    failed = False
    if manifest is not None:
        entries = json.loads(manifest.read_text())
        pairs = [(e["case_id"], Path(e["gt"]), Path(e["pred"])) for e in entries]
    else:
        gt_files = _nifti_files(gt)
        pred_files = _nifti_files(pred)
        for stem in sorted(set(gt_files) ^ set(pred_files)):
            side = "prediction" if stem in gt_files else "reference"
            click.echo(f"error: case '{stem}' has no paired {side}", err=True)
            failed = True
        common = sorted(set(gt_files) & set(pred_files))
        pairs = [(stem, gt_files[stem], pred_files[stem]) for stem in common]

    if not pairs:
        click.echo("error: no paired cases to evaluate", err=True)
        sys.exit(2)

    def run_one(entry):
        case_id, gt_path, pred_path = entry
        try:
            _, gt_map = read_nifti_file(gt_path, as_labels=True)
            _, pred_map = read_nifti_file(pred_path, as_labels=True)
            return case_id, evaluate_case(pred_map, gt_map, tols, params, case_id=case_id), None
        except (NiftiFormatError, GridMismatchError, ValueError) as exc:
            return case_id, None, str(exc)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_one, pairs))
    else:
        results = [run_one(p) for p in pairs]

    cases = []
    for case_id, scores, error in sorted(results, key=lambda r: r[0]):
        if error is not None:
            click.echo(f"error: case '{case_id}' skipped: {error}", err=True)
            failed = True
        else:
            cases.append(scores)

    if not cases:
        click.echo("error: every case failed; no report written", err=True)
        sys.exit(2)

    doc = ReportDocument.from_cases(cases, tols, params)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(emit_report(doc, fmt))
    click.echo(f"wrote {out} ({len(cases)} cases)")

    if figures is not None:
        from . import figures as figmod

        figures.mkdir(parents=True, exist_ok=True)
        fig_path = figures / "aggregate_scores.png"
        figmod.aggregate_bars(doc, fig_path)
        click.echo(f"wrote {fig_path}")

    sys.exit(1 if failed else 0)


@main.command()
@click.argument("model_a", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.argument("model_b", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True)
def fuse(model_a, model_b, out):
    """Hybrid fusion: ET/TC from MODEL_A, WT from MODEL_B."""
    try:
        _, a = read_nifti_file(model_a, as_labels=True)
        _, b = read_nifti_file(model_b, as_labels=True)
        fused = hybrid_fuse(a, b)
    except GridMismatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except NiftiFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_nifti_file(out, fused)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--channel", "-c", "channels", type=click.Path(exists=True, dir_okay=False, path_type=Path), multiple=True, help="Channel volume; give exactly 4 (T1, T1c, T2, FLAIR).")
@click.option("--labels", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None, help="Label map to resample alongside (nearest-neighbor).")
@click.option("--spacing", required=True, help="Target spacing in mm, e.g. 1,1,1.")
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), required=True)
def preprocess(channels, labels, spacing, out_dir):
    """Resample to a common spacing and z-score normalize brain voxels."""
    if len(channels) != 4:
        click.echo(f"error: exactly 4 channels required, got {len(channels)}", err=True)
        sys.exit(2)
    target = _parse_floats(spacing)
    if len(target) != 3:
        click.echo("error: --spacing needs 3 values", err=True)
        sys.exit(2)
    plan = ResamplePlan(tuple(target), mode="trilinear")

    volumes = [read_nifti_file(p)[1] for p in channels]
    resampled = [resample(v, plan) for v in volumes]
    scan = MultiModalScan(tuple(resampled))
    brain = infer_brain_mask(scan)

    out_dir.mkdir(parents=True, exist_ok=True)
    for src, vol in zip(channels, resampled):
        normalized = zscore_normalize(vol, brain)
        dest = out_dir / f"{_case_stem(src)}_preproc.nii.gz"
        write_nifti_file(dest, normalized)
        click.echo(f"wrote {dest}")
    if labels is not None:
        _, label_map = read_nifti_file(labels, as_labels=True)
        resampled_labels = resample_labels(label_map, ResamplePlan(tuple(target), mode="nearest"))
        dest = out_dir / f"{_case_stem(labels)}_preproc.nii.gz"
        write_nifti_file(dest, resampled_labels)
        click.echo(f"wrote {dest}")


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def info(path):
    """Dump the NIfTI-1 header of a file."""
    data = path.read_bytes()
    import gzip

    if data[:2] == b"\x1f\x8b":
        data = gzip.decompress(data)
    try:
        hdr = parse_header(data)
    except NiftiFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    click.echo(f"shape:      {hdr.shape}")
    click.echo(f"spacing:    {hdr.spacing} mm")
    click.echo(f"datatype:   {hdr.datatype} (bitpix {hdr.bitpix})")
    click.echo(f"byte order: {'little-endian' if hdr.byte_order == '<' else 'big-endian'}")
    click.echo(f"vox_offset: {hdr.vox_offset}")
    click.echo(f"scl:        slope {hdr.scl_slope}, inter {hdr.scl_inter}")
    click.echo(f"dim:        {hdr.dim}")


@main.command("lr-schedule")
@click.option("--epochs", type=int, required=True, help="Total training epochs.")
@click.option("--lr0", type=float, default=0.01, show_default=True)
@click.option("--exponent", type=float, default=0.9, show_default=True)
@click.option("--floor", type=float, default=0.0, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), required=True, help="CSV output (epoch,lr).")
@click.option("--figure", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Also render the schedule plot.")
def lr_schedule(epochs, lr0, exponent, floor, out, figure):
    """Emit the polynomial decay schedule as CSV."""
    cfg = TrainingConfig(total_epochs=epochs, lr0=lr0, poly_exponent=exponent, lr_floor=floor)
    schedule = build_schedule(cfg)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = ["epoch,lr"] + [f"{e},{lr!r}" for e, lr in schedule]
    out.write_text("\n".join(lines) + "\n")
    click.echo(f"wrote {out}")
    if figure is not None:
        from .figures import schedule_figure

        schedule_figure(schedule, figure)
        click.echo(f"wrote {figure}")


@main.command("analyze-curves")
@click.argument("curves", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--window", type=int, default=11, show_default=True)
@click.option("--fit-fraction", type=float, default=0.2, show_default=True)
@click.option("--grok-delta", type=float, default=0.05, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, path_type=Path), default=None, help="JSON output (stdout when omitted).")
@click.option("--figure", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Also render the annotated curves.")
def analyze_curves(curves, window, fit_fraction, grok_delta, out, figure):
    """Detect fit/overfit/grok phases in a training curve CSV
    (header: epoch,train_loss,val_score)."""
    epochs, train, val = [], [], []
    with open(curves, newline="") as fh:
        reader = csv.DictReader(fh)
        required = {"epoch", "train_loss", "val_score"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            click.echo(f"error: curve CSV must have columns {sorted(required)}", err=True)
            sys.exit(2)
        for row in reader:
            epochs.append(int(float(row["epoch"])))
            train.append(float(row["train_loss"]))
            val.append(float(row["val_score"]))

    try:
        phases = detect_phases(train, val, epochs=epochs, window=window, fit_fraction=fit_fraction, grok_delta=grok_delta)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)

    payload = json.dumps(
        {
            "fit_epoch": phases.fit_epoch,
            "fit_value": phases.fit_value,
            "overfit_epoch": phases.overfit_epoch,
            "overfit_value": phases.overfit_value,
            "grok_epoch": phases.grok_epoch,
            "grok_value": phases.grok_value,
        },
        indent=2,
    ) + "\n"
    if out is not None:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(payload)
        click.echo(f"wrote {out}")
    else:
        click.echo(payload, nl=False)

    if figure is not None:
        from .figures import phases_figure

        phases_figure(epochs, train, val, phases, figure, window=window)
        click.echo(f"wrote {figure}")


if __name__ == "__main__":
    main()
