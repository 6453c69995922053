"""
eval and cross-analysis: artifacts computed from a trained checkpoint.
"""
import logging
from pathlib import Path

from cli.handlers.train import load_spectral_data
from cli.runs import register_artifacts, registered_run, resolve_context, write_run_manifest
from database.registry import record_errors
from errors import UsageError
from evaluation import (
    cross_discriminator_analysis,
    evaluate_report,
    plot_discriminator_outputs,
    render_table,
    save_cross_records,
    save_report,
)
from model import Mode
from storage import dump_kv
from trainer import checkpoint_load

logger = logging.getLogger(__name__)


def _checkpoint(ctx, args) -> Path:
    return Path(args.checkpoint) if getattr(args, "checkpoint", None) else ctx.checkpoint_dir


def cmd_eval(args) -> int:
    ctx = resolve_context(args.config, args.seed, args.out)
    out_dir = ctx.run_dir / "eval"
    model = checkpoint_load(_checkpoint(ctx, args))
    dataset, data = load_spectral_data(ctx)

    with registered_run(ctx.run_name, "eval", ctx.run_dir, config_hash=ctx.config_hash, seed=ctx.seed,
                        mode=model.mode.value, dataset_kind=dataset.kind) as run_id:
        artifacts = []
        for domain in ctx.cfg.evaluation.domains:
            report = evaluate_report(
                model, data.test, domain, dataset_id=ctx.dataset_dir.name, seed=ctx.seed,
                batch_size=ctx.cfg.train.eval_batch_size,
            )
            artifacts.append(("report", save_report(report, out_dir / f"report_{domain}.txt")))
            for fmt, suffix in (("text", "txt"), ("csv", "csv")):
                path = out_dir / f"errors_{domain}.{suffix}"
                path.write_text(render_table(report, fmt), encoding="utf-8")
                artifacts.append(("table", path))
            record_errors(run_id, domain, report.mode, report.rows)
            logger.info(f"{domain} errors:\n{render_table(report)}")
        write_run_manifest(ctx.run_dir, "eval", artifacts, ctx.config_hash, ctx.seed,
                           inputs={"checkpoint": str(_checkpoint(ctx, args))})
        register_artifacts(run_id, ctx.run_dir, artifacts)
    print(out_dir)
    return 0


def cmd_cross_analysis(args) -> int:
    ctx = resolve_context(args.config, args.seed, args.out)
    model = checkpoint_load(_checkpoint(ctx, args))
    if model.mode == Mode.BASELINE:
        raise UsageError("cross-analysis needs trained discriminators; this checkpoint is a baseline model")
    out_dir = ctx.run_dir / "cross"
    dataset, data = load_spectral_data(ctx)

    with registered_run(ctx.run_name, "cross-analysis", ctx.run_dir, config_hash=ctx.config_hash, seed=ctx.seed,
                        mode=model.mode.value, dataset_kind=dataset.kind) as run_id:
        records = cross_discriminator_analysis(
            model, data.test, ctx.cfg.evaluation.threshold, batch_size=ctx.cfg.train.eval_batch_size,
        )
        outputs = save_cross_records(records, out_dir / "outputs.npz")
        summary = dump_kv(
            {
                "threshold": ctx.cfg.evaluation.threshold,
                "pairs": {
                    f"{r.source}_to_{r.judge}": {
                        "source": model.names[r.source],
                        "judge": model.names[r.judge],
                        "mean": float(r.outputs.mean()),
                        "fraction_fake": r.fraction_fake,
                    }
                    for r in records
                },
            },
            out_dir / "summary.txt",
            header="discriminator outputs on other components' AE outputs",
        )
        plots = plot_discriminator_outputs(records, out_dir, model.names)
        artifacts = [("cross", outputs), ("report", summary)] + [("scatter", p) for p in plots]
        write_run_manifest(ctx.run_dir, "cross-analysis", artifacts, ctx.config_hash, ctx.seed,
                           inputs={"checkpoint": str(_checkpoint(ctx, args))})
        register_artifacts(run_id, ctx.run_dir, artifacts)
    print(out_dir)
    return 0
