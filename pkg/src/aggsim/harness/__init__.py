"""Configuration, time loop, checkpoints, experiments and the command line."""

from .checkpoint import Checkpoint, read_checkpoint, write_checkpoint
from .config import ICConfig, OutputConfig, RunConfig, load_config, parse_config, preset_config
from .initial import initial_state
from .loop import advance, run, simulate, step, trajectory
