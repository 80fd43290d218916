"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import json
import logging

from pyfracrigid.observer.Observer import Observer
from pyfracrigid.utils.utils import Utils

logger = logging.getLogger(__name__)


class TraceWriter(Observer):
    """Appends every received record to a JSON-lines file, one line per message."""

    def __init__(self, path):
        super().__init__()
        self.path = path
        self.count = 0
        # truncate
        open(self.path, "w").close()

    def handleMessage(self, msg):
        record = dict(msg.obj or {})
        record["event"] = msg.what.name
        with open(self.path, "a") as fh:
            fh.write(json.dumps(Utils.to_jsonable(record), sort_keys=True) + "\n")
        self.count += 1


class TraceCollector(Observer):
    """Keeps received records in memory; handy for tests and notebooks."""

    def __init__(self):
        super().__init__()
        self.records = []

    def handleMessage(self, msg):
        self.records.append((msg.what, msg.obj))
