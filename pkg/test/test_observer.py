"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import json

from pyfracrigid.enums.TraceEvent import TraceEvent
from pyfracrigid.observer.Message import Message
from pyfracrigid.observer.Observer import Observer
from pyfracrigid.observer.TraceWriter import TraceCollector, TraceWriter


class Counter(Observer):
    def __init__(self):
        super().__init__()
        self.seen = []

    def handleMessage(self, msg):
        self.seen.append(msg.obj)


def test_loop_handles_messages_in_order():
    obs = Counter()
    obs.startLoop()
    for k in range(50):
        obs.sendMessage(Message(TraceEvent.STEP, k))
    obs.stopLoop(timeout=5)
    assert obs.seen == list(range(50))


def test_messages_sent_before_start_are_kept():
    obs = TraceCollector()
    obs.sendMessage(Message(TraceEvent.PREPASS, {"regime": "SUBGRID"}))
    obs.startLoop()
    obs.sendMessage(Message(TraceEvent.DONE))
    obs.stopLoop(timeout=5)
    assert obs.records == [(TraceEvent.PREPASS, {"regime": "SUBGRID"}), (TraceEvent.DONE, None)]


def test_trace_writer_writes_json_lines(tmp_path):
    path = tmp_path / "trace.jsonl"
    path.write_text("stale\n")
    writer = TraceWriter(path)
    writer.startLoop()
    writer.sendMessage(Message(TraceEvent.STEP, {"step": 0, "lam": 0.25}))
    writer.sendMessage(Message(TraceEvent.DONE, {"steps": 1}))
    writer.stopLoop(timeout=5)
    lines = path.read_text().splitlines()
    assert writer.count == 2
    assert [json.loads(line) for line in lines] == [{"event": "STEP", "lam": 0.25, "step": 0},
                                                    {"event": "DONE", "steps": 1}]
