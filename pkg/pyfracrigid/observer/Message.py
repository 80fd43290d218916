"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""


class Message:
    def __init__(self, what, obj=None):
        """
        Parameters:
            what (TraceEvent): The kind of record carried (engine step, pre-pass, end of run).
            obj: The record itself, a JSON-serialisable dict.
        """
        self.what = what
        self.obj = obj
