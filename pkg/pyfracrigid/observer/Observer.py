"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import queue
import threading


class Observer:
    def __init__(self):
        # Thread-safe queue to hold messages
        self.msg_queue = queue.Queue()
        self._thread = None

    def sendMessage(self, msg):
        """
        Called by the engine to publish a new trace message.
        """
        self.msg_queue.put(msg)

    def handleMessage(self, msg):
        """
        Override this method to handle incoming messages.
        """
        pass

    def startLoop(self):
        """
        Starts the message loop in a daemon thread.
        """
        self._thread = threading.Thread(target=self._loop, daemon=True)
        self._thread.start()

    def stopLoop(self, timeout=None):
        """
        Sends the stop signal and waits until every queued message has been handled.
        """
        self.msg_queue.put(None)
        if self._thread is not None:
            self._thread.join(timeout)
            self._thread = None

    def _loop(self):
        while True:
            msg = self.msg_queue.get()
            if msg is None:  # None stops the loop
                break
            self.handleMessage(msg)
