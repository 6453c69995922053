"""
gen-data: synthesize (or ingest) the configured dataset once per dataset config.
"""
import logging
import shutil

from cli.experiment import build_dataset
from cli.runs import RunContext, register_artifacts, registered_run, resolve_context, write_run_manifest
from synthgen import manifest_hash, save_dataset
from synthgen.datasets import MANIFEST_NAME

logger = logging.getLogger(__name__)


def cmd_gen_data(args) -> int:
    ctx: RunContext = resolve_context(args.config, args.seed, args.out)
    directory = ctx.dataset_dir
    manifest = directory / MANIFEST_NAME
    with registered_run(directory.name, "gen-data", directory, config_hash=ctx.config_hash,
                        seed=ctx.cfg.dataset.seed, dataset_kind=ctx.cfg.dataset.kind) as run_id:
        if manifest.is_file() and not args.force:
            logger.info(f"Dataset already present at {directory}; not regenerating")
        else:
            if directory.exists():
                shutil.rmtree(directory)
            dataset = build_dataset(ctx.cfg.dataset)
            save_dataset(dataset, directory)
        artifacts = [("manifest", manifest)]
        write_run_manifest(directory, "gen-data", artifacts, seed=ctx.cfg.dataset.seed,
                           inputs={"dataset_hash": directory.name})
        register_artifacts(run_id, directory, artifacts)
    print(f"{directory} {manifest_hash(directory)}")
    return 0
