from pathlib import Path


def start(config: dict, name: str):
    """Open an offline wandb run when output.wandb_project is set, else return None."""
    project = config["output"]["wandb_project"]
    if not project:
        return None
    import wandb

    run = wandb.init(
        project=project,
        name=name,
        config=config,
        dir=str(Path(config["output"]["directory"])),
        mode="offline",
    )
    if config["output"]["verbose"] > 0:
        print("WANDB directory: {}".format(run.dir))
    return run


def log(run, metrics: dict):
    if run is None:
        return
    run.log({k: v for k, v in metrics.items() if isinstance(v, (int, float)) and not isinstance(v, bool)})


def finish(run):
    if run is not None:
        run.finish()
