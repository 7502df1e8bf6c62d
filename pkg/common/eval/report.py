"""Evaluation report: per-class results, aggregates and export."""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from common.eval.metrics import MAP_THRESHOLDS, PRECISION_THRESHOLD, ClassEvaluation
from common.scene.io import write_json
from common.utils.logger import setup_logger

logger = setup_logger(__name__)


def _key(t: float) -> str:
    return f"{t:.2f}"


@dataclass(frozen=True)
class ClassReport:
    label: int
    name: str
    num_gt: int
    num_pred: int
    ap: Dict[float, float]
    counts: Dict[float, Dict[str, int]]
    precision: float
    recall: float
    precision_defined: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'label': self.label,
            'name': self.name,
            'num_gt': self.num_gt,
            'num_pred': self.num_pred,
            'ap': {_key(t): v for t, v in self.ap.items()},
            'counts': {_key(t): c for t, c in self.counts.items()},
            'precision': self.precision,
            'recall': self.recall,
            'precision_defined': self.precision_defined,
        }


@dataclass(frozen=True)
class EvalReport:
    """AP per class and threshold; means run over classes present in GT."""

    thresholds: List[float]
    classes: List[ClassReport] = field(default_factory=list)

    @property
    def scored_classes(self) -> List[ClassReport]:
        return [c for c in self.classes if c.num_gt > 0]

    def map_at(self, threshold: float) -> float:
        scored = self.scored_classes
        if not scored:
            return 0.0
        return float(np.mean([c.ap[threshold] for c in scored]))

    @property
    def map25(self) -> float:
        return self.map_at(0.25)

    @property
    def map50(self) -> float:
        return self.map_at(0.5)

    @property
    def map(self) -> float:
        # bounded by mAP@50 under rounding
        value = math.fsum(self.map_at(t) for t in MAP_THRESHOLDS) / len(MAP_THRESHOLDS)
        return min(value, self.map50)

    @property
    def mprec(self) -> float:
        scored = self.scored_classes
        return float(np.mean([c.precision for c in scored])) if scored else 0.0

    @property
    def mrec(self) -> float:
        scored = self.scored_classes
        return float(np.mean([c.recall for c in scored])) if scored else 0.0

    @property
    def precision_defined(self) -> bool:
        return all(c.precision_defined for c in self.scored_classes)

    def summary(self) -> Dict[str, float]:
        return {'mAP25': self.map25, 'mAP50': self.map50, 'mAP': self.map,
                'mPrec': self.mprec, 'mRec': self.mrec}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'thresholds': [_key(t) for t in self.thresholds],
            'summary': self.summary(),
            'precision_defined': self.precision_defined,
            'per_threshold_mAP': {_key(t): self.map_at(t) for t in self.thresholds},
            'classes': [c.to_dict() for c in self.classes],
        }

    def to_table(self) -> str:
        """Aligned per-class table (AP@25, AP@50, AP, precision, recall)."""
        header = ['class', 'AP25', 'AP50', 'AP', 'Prec', 'Rec', 'GT', 'Pred']
        rows = []
        for c in self.classes:
            ap = float(np.mean([c.ap[t] for t in MAP_THRESHOLDS]))
            rows.append([c.name, f"{c.ap[0.25]:.3f}", f"{c.ap[0.5]:.3f}", f"{ap:.3f}",
                         f"{c.precision:.3f}", f"{c.recall:.3f}", str(c.num_gt), str(c.num_pred)])
        s = self.summary()
        rows.append(['mean', f"{s['mAP25']:.3f}", f"{s['mAP50']:.3f}", f"{s['mAP']:.3f}",
                     f"{s['mPrec']:.3f}", f"{s['mRec']:.3f}", '', ''])
        widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
        lines = []
        for k, r in enumerate([header] + rows):
            cells = [r[0].ljust(widths[0])] + [v.rjust(w) for v, w in zip(r[1:], widths[1:])]
            lines.append('  '.join(cells).rstrip())
            if k == 0 or k == len(rows) - 1:
                lines.append('  '.join('-' * w for w in widths))
        return '\n'.join(lines) + '\n'


def build_report(per_class: Sequence[ClassEvaluation], thresholds: Sequence[float],
                 class_names: Optional[Sequence[str]] = None) -> EvalReport:
    classes = []
    for ce in per_class:
        at_prec = ce.results[PRECISION_THRESHOLD]
        precision = at_prec.precision
        recall = at_prec.recall
        name = class_names[ce.label] if class_names and 0 <= ce.label < len(class_names) else str(ce.label)
        if ce.num_gt == 0:
            logger.warning(f"Class '{name}' has predictions but no GT instances; excluded from means")
        classes.append(ClassReport(
            label=ce.label,
            name=name,
            num_gt=ce.num_gt,
            num_pred=ce.num_pred,
            ap={t: r.ap for t, r in ce.results.items()},
            counts={t: {'tp': r.tp, 'fp': r.fp, 'fn': r.fn} for t, r in ce.results.items()},
            precision=0.0 if precision is None else precision,
            recall=0.0 if recall is None else recall,
            precision_defined=precision is not None,
        ))
    return EvalReport(thresholds=list(thresholds), classes=classes)


def save_report(path: str, report: EvalReport) -> None:
    write_json(path, report.to_dict())


def save_table(path: str, report: EvalReport) -> None:
    with open(path, 'w', encoding='utf-8') as f:
        f.write(report.to_table())
