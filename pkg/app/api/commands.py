import functools
import logging
from typing import Optional

import click
from pydantic import ValidationError

from app.config import settings
from app.modules.training import format_ablation
from app.utils.errors import DfDamError
from app.utils.helpers import parse_float_list
from app.utils.logging_config import setup_logging
from .controllers import lab_controller
from .run_config import load_run_config

logger = logging.getLogger(__name__)

EXIT_VERIFY_FAILED = 1


def exit_codes(fn):
    """Map library errors to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DfDamError as e:
            logger.error(f"{fn.__name__} failed: {e}")
            click.echo(f"error: {e}", err=True)
            raise SystemExit(e.exit_code)
        except ValidationError as e:
            logger.error(f"{fn.__name__}: invalid configuration: {e}")
            click.echo(f"error: invalid configuration: {e}", err=True)
            raise SystemExit(2)
        except OSError as e:
            logger.error(f"{fn.__name__}: I/O error: {e}")
            click.echo(f"error: {e}", err=True)
            raise SystemExit(2)

    return wrapper


def _scales(ctx, param, value: Optional[str]):
    if value is None:
        return None
    try:
        scales = parse_float_list(value)
    except ValueError:
        raise click.BadParameter(f"expected comma-separated numbers, got {value!r}")
    if not scales or any(s <= 0 for s in scales):
        raise click.BadParameter("scales must be a non-empty list of positive numbers")
    return scales


@click.group()
@click.option("--log-level", default=None, help="Overrides DFDAM_LOG_LEVEL.")
def cli(log_level: Optional[str]):
    """Dual-attention segmentation lab: data, training, evaluation and checks."""
    setup_logging(
        log_level=log_level or settings.log_level,
        log_dir=settings.log_dir if settings.log_to_file else None,
    )


@cli.command("gen-data")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@exit_codes
def gen_data(config_path, out_dir):
    """Write a synthetic dataset (PPM images, PGM labels, manifest)."""
    manifest = lab_controller.generate_data(load_run_config(config_path), out_dir)
    click.echo(str(manifest))


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--data", "data_dir", type=click.Path(), default=None)
@click.option("--out", type=click.Path(), default=None)
@click.option("--baseline", is_flag=True, help="Train the summation baseline.")
@exit_codes
def train(config_path, data_dir, out, baseline):
    """Train a model and write its checkpoint and loss trajectory."""
    config = load_run_config(config_path)
    data_dir = data_dir or config.data_dir
    out = out or config.checkpoint
    if data_dir is None or out is None:
        raise click.UsageError("--data and --out are required (or data_dir / checkpoint in the config)")
    result = lab_controller.train_model(config, data_dir, out, baseline)
    click.echo(f"final joint loss {result.trajectory[-1].joint!r}")


@cli.command("eval")
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--ckpt", type=click.Path(), required=True)
@click.option("--data", "data_dir", type=click.Path(), required=True)
@click.option("--scales", callback=_scales, default=None, help="Comma-separated, default 1.0 or eval_scales.")
@click.option("--flip", is_flag=True, help="Also average the mirrored image.")
@exit_codes
def evaluate(config_path, ckpt, data_dir, scales, flip):
    """Score a checkpoint on a manifest and print per-class IoU."""
    if config_path is not None:
        eval_cfg = load_run_config(config_path).eval_config()
        scales = scales or eval_cfg.scales
        flip = flip or eval_cfg.flip
    report = lab_controller.evaluate(ckpt, data_dir, scales, flip, settings.eval_workers)
    if report is None:
        logger.warning(f"No samples in {data_dir}")
        click.echo("no samples")
        return
    click.echo(lab_controller.report(report), nl=False)


@cli.command()
@click.option("--ckpt", type=click.Path(), required=True)
@click.option("--image", "image_path", type=click.Path(), required=True)
@click.option("--out", type=click.Path(), required=True)
@click.option("--attn", "attn_dir", type=click.Path(), default=None)
@exit_codes
def predict(ckpt, image_path, out, attn_dir):
    """Predict a label map for one PPM image."""
    click.echo(str(lab_controller.predict(ckpt, image_path, out, attn_dir)))


@cli.command()
@exit_codes
def verify():
    """Run the gradient checks and operator oracles."""
    results = lab_controller.verify()
    for r in results:
        status = "pass" if r.passed else "FAIL"
        click.echo(f"{r.name}\t{status}\terror={r.error:.3e}\ttolerance={r.tolerance:.0e}\t{r.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.error(f"Verification failed: {', '.join(failed)}")
        raise SystemExit(EXIT_VERIFY_FAILED)


@cli.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--data", "data_dir", type=click.Path(), required=True)
@click.option("--val", "val_dir", type=click.Path(), required=True)
@click.option("--seeds", type=click.IntRange(min=1), default=3, show_default=True)
@exit_codes
def ablate(config_path, data_dir, val_dir, seeds):
    """Train baseline, DAFM-only and DAFM+2DPAM over several seeds and compare val mIoU."""
    results = lab_controller.ablate(load_run_config(config_path), data_dir, val_dir, seeds)
    click.echo(format_ablation(results), nl=False)
