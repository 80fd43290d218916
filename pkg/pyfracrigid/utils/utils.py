"""
PyFracRigid - A Python toolkit for piecewise rigid decomposition of cracked deformation fields.

Author: PyFracRigid developers
License: Apache 2.0 License
Version: 2026.10.0
Created on 18/10/26
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy import stats

logger = logging.getLogger(__name__)


class LogLogFit(NamedTuple):
    slope: float
    intercept: float
    r_squared: float
    stderr: float
    ci_low: float
    ci_high: float
    points: int

    def to_dict(self):
        return self._asdict()


class Utils:
    @staticmethod
    def to_jsonable(obj):
        """
        Recursively converts numpy scalars and arrays, tuples and enums into plain JSON types.

        Non-finite floats are kept (json writes them as NaN/Infinity) so that no measured
        value is silently lost.
        """
        if isinstance(obj, Mapping):
            return {str(k): Utils.to_jsonable(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [Utils.to_jsonable(v) for v in obj]
        if isinstance(obj, np.ndarray):
            return Utils.to_jsonable(obj.tolist())
        if isinstance(obj, (np.bool_, bool)):
            return bool(obj)
        if isinstance(obj, (np.integer,)):
            return int(obj)
        if isinstance(obj, (np.floating,)):
            return float(obj)
        if isinstance(obj, Enum):
            return obj.name
        return obj

    @staticmethod
    def write_json(path, obj):
        with open(path, "w") as fh:
            json.dump(Utils.to_jsonable(obj), fh, sort_keys=True, indent=2)
        logger.info("wrote %s", path)

    @staticmethod
    def read_json(path):
        with open(path) as fh:
            return json.load(fh)

    @staticmethod
    def write_jsonl(path, records: Iterable[Dict]):
        with open(path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(Utils.to_jsonable(rec), sort_keys=True) + "\n")

    @staticmethod
    def read_jsonl(path) -> List[Dict]:
        with open(path) as fh:
            return [json.loads(line) for line in fh if line.strip()]

    @staticmethod
    def write_csv(path, rows: Sequence[Dict], columns=None) -> pd.DataFrame:
        """
        Writes a list of flat records through a DataFrame, one row per record.

        :param path: target file.
        :param rows: records.
        :param columns: optional column order.
        :return: the DataFrame written.
        """
        df = pd.DataFrame(list(rows), columns=columns)
        df.to_csv(path, index=False)
        logger.info("wrote %s (%d rows)", path, len(df))
        return df

    @staticmethod
    def write_label_grid(path, labels: np.ndarray) -> pd.DataFrame:
        """Integer label grid, first row = bottom row of cells (j = 0)."""
        df = pd.DataFrame(np.asarray(labels, dtype=np.int64))
        df.to_csv(path, index=False, header=False)
        logger.info("wrote %s", path)
        return df

    @staticmethod
    def read_label_grid(path) -> np.ndarray:
        return pd.read_csv(path, header=None).to_numpy(dtype=np.int64)

    @staticmethod
    def ordered_map(fn: Callable, items: Iterable, threads: int = 1) -> List:
        """
        [fn(x) for x in items], spread over at most ``threads`` worker threads.

        Results keep the order of ``items`` whatever the thread count.
        """
        items = list(items)
        if threads <= 1 or len(items) <= 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
            return list(pool.map(fn, items))

    @staticmethod
    def parse_float_list(text: str) -> List[float]:
        """'0.2,0.1,0.05' -> [0.2, 0.1, 0.05]"""
        return [float(v) for v in text.split(",") if v.strip()]

    @staticmethod
    def loglog_fit(x, y, confidence: float = 0.95) -> LogLogFit:
        """
        Least-squares line through (log x, log y) with a t-based confidence interval on the slope.

        :raises ValueError: fewer than three points or non-positive data.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.size < 3:
            raise ValueError("A log-log fit needs at least three points")
        if np.any(x <= 0) or np.any(y <= 0) or not np.all(np.isfinite(y)):
            raise ValueError("A log-log fit needs positive finite data")
        res = stats.linregress(np.log(x), np.log(y))
        dof = x.size - 2
        half = float(stats.t.ppf(0.5 + confidence / 2.0, dof)) * float(res.stderr) if dof > 0 else math.inf
        return LogLogFit(float(res.slope), float(res.intercept), float(res.rvalue) ** 2, float(res.stderr),
                         float(res.slope) - half, float(res.slope) + half, int(x.size))
