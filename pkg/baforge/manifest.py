"""
Run manifests.

Every command that writes artifacts also writes one manifest next to them,
recording what made them: `manifest.json` inside an output directory, or
`<name>.manifest.json` beside an output file.

:copyright: 2026 The ba-forge Authors
:license: Apache 2.0
"""
import datetime
import os

from .formats import write_json
from .utils import config_hash

FILENAME = 'manifest.json'


class RunManifest(object):
    """
    Provenance of one command's outputs.

    Args:
        command (str): The subcommand.
        config (dict): Everything the outputs depend on.
        seed (int): The master seed.
        inputs (dict): Name to path of every input.
        outputs (dict): Name to path of every output.
        version (str): Tool version.
    """
    def __init__(self, command, config, seed, inputs=None, outputs=None, version=None):
        from . import __version__

        self.command = command
        self.config = config
        self.seed = seed
        self.inputs = dict(inputs or {})
        self.outputs = dict(outputs or {})
        self.version = version or __version__
        self.started = _now()
        self.finished = None

    def __repr__(self):
        return 'RunManifest({}, hash={})'.format(self.command, self.config_hash[:12])

    @property
    def config_hash(self):
        return config_hash({'command': self.command, 'config': self.config, 'seed': self.seed})

    def to_dict(self):
        return {
            'tool': 'ba-forge',
            'version': self.version,
            'command': self.command,
            'config': self.config,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'started': self.started,
            'finished': self.finished,
        }

    def write(self, path):
        """
        Stamp the finish time and write the manifest.

        Args:
            path (str): A file path, or a directory to write
                `manifest.json` into.

        Returns:
            str. The path written.
        """
        self.finished = _now()
        if os.path.isdir(path):
            path = os.path.join(path, FILENAME)
        write_json(path, self.to_dict())
        return path


def _now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')


def manifest_path(output):
    """
    Where the manifest of an output file goes: 'ax.ppm' -> 'ax.manifest.json'.
    """
    return os.path.splitext(output)[0] + '.manifest.json'
