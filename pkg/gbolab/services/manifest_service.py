import csv
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import gbolab
from gbolab.config.run_config import config_document

logger = logging.getLogger(__name__)

MANIFEST_FILE = 'manifest.json'
MANIFEST_KEYS = ('command', 'config_hash', 'code_version', 'started_at', 'finished_at',
                 'config', 'outputs', 'summary', 'checks', 'passed')


def config_hash(document):
    """md5 of the canonical JSON form of a config document"""
    return hashlib.md5(json.dumps(document, sort_keys=True).encode()).hexdigest()


def _utc_now():
    return datetime.now(timezone.utc).isoformat(timespec='seconds')


def _plain(value):
    """numpy scalars and tuples to JSON-native values"""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, 'item') and callable(value.item):
        return value.item()
    return value


def _format(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ''
    return value


@dataclass
class RunManifest:
    command: str
    config: dict
    out_dir: str
    started_at: str = field(default_factory=_utc_now)
    finished_at: str = None
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @classmethod
    def start(cls, command, config, out_dir):
        os.makedirs(out_dir, exist_ok=True)
        manifest = cls(command=command, config=config_document(command, config), out_dir=out_dir)
        logger.info("🚀 %s run %s -> %s", command, manifest.config_hash[:8], out_dir)
        return manifest

    @property
    def config_hash(self):
        return config_hash(self.config)

    @property
    def passed(self):
        return all(self.checks.values())

    def check(self, name, ok):
        self.checks[name] = bool(ok)
        if ok:
            logger.info("✅ %s", name)
        else:
            logger.warning("❌ %s", name)
        return bool(ok)

    def write_csv(self, name, columns, rows):
        """Rows are dicts; floats are written with repr so reruns are byte-identical"""
        path = os.path.join(self.out_dir, name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_format(_plain(row.get(column))) for column in columns])
        self.outputs.append(name)
        logger.info("💾 Saved %s (%d rows)", name, len(rows))
        return path

    def write_json(self, name, payload):
        path = os.path.join(self.out_dir, name)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(_plain(payload), f, indent=2)
            f.write('\n')
        self.outputs.append(name)
        logger.info("💾 Saved %s", name)
        return path

    def to_document(self):
        values = {
            'command': self.command,
            'config_hash': self.config_hash,
            'code_version': gbolab.__version__,
            'started_at': self.started_at,
            'finished_at': self.finished_at,
            'config': self.config,
            'outputs': list(self.outputs),
            'summary': _plain(self.summary),
            'checks': dict(self.checks),
            'passed': self.passed,
        }
        return {key: values[key] for key in MANIFEST_KEYS}

    def finish(self):
        self.finished_at = _utc_now()
        path = os.path.join(self.out_dir, MANIFEST_FILE)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_document(), f, indent=2)
            f.write('\n')
        status = "passed" if self.passed else "failed"
        logger.info("📋 %s %s: %d/%d checks", self.command, status, sum(self.checks.values()), len(self.checks))
        return self
