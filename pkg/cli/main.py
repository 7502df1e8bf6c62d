import sys
from typing import List, Optional

import click

from cli.commands.cluster_commands import baseline, cluster, segment
from cli.commands.eval_commands import eval_masks
from cli.commands.experiment_commands import compare, pipeline, simulate, sweep_degrade, sweep_tau
from cli.commands.label_commands import degrade, genlabels
from common.utils.config import get_config
from common.utils.logger import set_global_level


class ExperimentGroup(click.Group):
    """Command group mapping failures to exit codes: usage and config 1, data 2."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(1)
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo('Aborted!', err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


@click.group(cls=ExperimentGroup)
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), default=None,
              help='YAML config with log level and parameter defaults')
@click.option('--verbose', is_flag=True, help='Log at DEBUG level')
@click.pass_context
def cli(ctx, config_path: Optional[str], verbose: bool):
    """Box-supervised 3D instance segmentation experiments"""
    try:
        config = get_config(config_path)
    except (FileNotFoundError, ValueError) as e:
        raise click.UsageError(str(e), ctx=ctx)
    set_global_level('DEBUG' if verbose else config.get('log_level', 'INFO'))
    ctx.obj = {'config': config}


# Register commands
cli.add_command(genlabels)
cli.add_command(degrade)
cli.add_command(simulate)
cli.add_command(cluster)
cli.add_command(segment)
cli.add_command(baseline)
cli.add_command(eval_masks)
cli.add_command(pipeline)
cli.add_command(sweep_tau)
cli.add_command(sweep_degrade)
cli.add_command(compare)


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and return its exit code instead of exiting."""
    try:
        cli.main(args=argv, prog_name='boxvote')
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else 1
    return 0


if __name__ == "__main__":
    cli()
