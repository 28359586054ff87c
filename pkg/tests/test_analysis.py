# tests/test_analysis.py
import unittest
import sys
import os
import tempfile

import numpy as np
import pandas as pd

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import Config
from engine.analysis import assign_communities, infer_unit_blocks, score_recovery, task_importance
from engine.datasets import GroundTruth
from engine.nmf import Decomposition, NmfConfig

UNASSIGNED = Config.UNASSIGNED


def decomposition(T, U, **meta):
    T, U = np.asarray(T, dtype=float), np.asarray(U, dtype=float)
    return Decomposition(T, U, [0.0], NmfConfig(c0=U.shape[0]), meta=meta)


class TestAssignment(unittest.TestCase):
    """Test hard community labels"""

    def test_argmax_with_ties_and_zero_rows(self):
        """Ties go to the lowest task and zero rows stay unassigned"""
        dec = decomposition([[0.2, 0.9], [0.5, 0.5], [0.0, 0.0], [1.0, 0.1]], [[1, 0], [0, 1]])
        assign = assign_communities(dec, [(2, 0), (2, 1), (3, 0), (3, 1)])
        self.assertEqual(assign.labels, [1, 0, UNASSIGNED, 0])
        self.assertEqual(assign.unassigned(), [2])
        self.assertEqual(assign.members(), {0: {2: [1], 3: [1]}, 1: {2: [0]}})

    def test_row_scaling_keeps_labels(self):
        """Scaling a T row by a positive factor leaves its argmax unchanged"""
        rng = np.random.default_rng(4)
        T = rng.uniform(size=(12, 3))
        scaled = T * rng.uniform(0.1, 10.0, size=(12, 1))
        U = np.eye(3, 5)
        self.assertEqual(assign_communities(decomposition(T, U)).labels,
                         assign_communities(decomposition(scaled, U)).labels)

    def test_unit_index_from_meta(self):
        """Unit keys come from the decomposition meta"""
        dec = decomposition([[1.0], [2.0]], [[1.0, 1.0]], unit_index=[[2, 0], [3, 0]])
        assign = assign_communities(dec)
        self.assertEqual(assign.unit_index, [(2, 0), (3, 0)])
        self.assertEqual(assign.to_dict()["members"], {"0": {"2": [0], "3": [0]}})

    def test_csv_export(self):
        """assignments.csv holds unit, layer, community and weights"""
        dec = decomposition([[0.3, 0.1], [0.0, 0.4]], [[1, 0], [0, 1]])
        assign = assign_communities(dec, [(2, 0), (2, 1)])
        with tempfile.TemporaryDirectory() as tmp:
            frame = pd.read_csv(assign.to_csv(os.path.join(tmp, "assignments.csv")))
        self.assertEqual(list(frame.columns), ["unit", "layer", "community", "weight_0", "weight_1"])
        self.assertEqual(frame["community"].tolist(), [0, 1])


class TestRecovery(unittest.TestCase):
    """Test purity, matching and concentration"""

    def setUp(self):
        # two planted blocks: inputs {0,1}/{2,3}, outputs {0}/{1} at columns 4/5
        self.truth = GroundTruth(2, [0, 0, 1, 1], [0, 0, 1, 1], [0, 1])
        self.columns = self.truth.block_columns()

    def test_perfect_recovery_with_swapped_labels(self):
        """Relabeled perfect recovery scores 1"""
        T = [[0, 1], [0, 2], [3, 0], [1, 0]]
        U = [[0, 0, 1, 1, 0, 1], [1, 1, 0, 0, 1, 0]]
        dec = decomposition(T, U)
        score = score_recovery(assign_communities(dec), self.truth, dec.U, self.columns)
        self.assertEqual(score.purity, 1.0)
        self.assertEqual(score.matching, {0: 1, 1: 0})
        self.assertEqual(score.concentrations, [1.0, 1.0])
        self.assertFalse(score.partial)
        self.assertEqual(score.to_dict()["matching"], {"0": 1, "1": 0})

    def test_partial_purity(self):
        """One misplaced unit out of four gives 0.75"""
        T = [[1, 0], [1, 0], [1, 0], [0, 1]]
        U = [[1, 1, 1, 1, 1, 1], [0, 0, 1, 1, 0, 1]]
        dec = decomposition(T, U)
        score = score_recovery(assign_communities(dec), self.truth, dec.U, self.columns)
        self.assertEqual(score.purity, 0.75)
        self.assertEqual(score.matching, {0: 0, 1: 1})
        self.assertEqual(score.concentrations, [0.5, 1.0])
        self.assertEqual(score.median_concentration, 0.75)

    def test_more_tasks_than_blocks(self):
        """Extra tasks are left unmatched and flagged partial"""
        T = [[1, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]
        U = np.eye(3, 6)
        dec = decomposition(T, U)
        score = score_recovery(assign_communities(dec), self.truth, dec.U, self.columns)
        self.assertTrue(score.partial)
        self.assertEqual(len(score.matching), 2)
        self.assertEqual(score.concentrations.count(None), 1)
        self.assertEqual(score.purity, 0.75)

    def test_unlabeled_units_are_not_scored(self):
        """Units without a truth label leave the denominator; a unit without a community misses"""
        dec = decomposition([[1, 0], [0, 0], [0, 1], [0, 1]], np.eye(2, 6))
        score = score_recovery(assign_communities(dec), [0, 0, UNASSIGNED, 1], dec.U, self.columns)
        self.assertEqual(score.scored_units, 3)
        self.assertEqual(score.k0, 4)
        self.assertAlmostEqual(score.purity, 2 / 3)
        self.assertEqual(len(score.notes), 2)

    def test_unassigned_units_count_as_misses(self):
        """Two of four units without a community halve the purity"""
        dec = decomposition([[1, 0], [0, 0], [0, 1], [0, 0]], np.eye(2, 6))
        score = score_recovery(assign_communities(dec), self.truth, dec.U, self.columns)
        self.assertEqual(score.purity, 0.5)
        self.assertEqual(score.scored_units, 4)
        self.assertEqual(score.matching, {0: 0, 1: 1})

    def test_random_assignment_beats_chance(self):
        """Best matching of a random assignment over three balanced blocks reaches 1/3"""
        truth = GroundTruth(3, [0, 0, 1, 1, 2, 2], [k % 3 for k in range(30)], [0, 1, 2])
        rng = np.random.default_rng(17)
        for trial in range(10):
            dec = decomposition(rng.uniform(0.01, 1.0, size=(30, 3)), rng.uniform(size=(3, 9)))
            score = score_recovery(assign_communities(dec), truth, dec.U, truth.block_columns())
            self.assertGreaterEqual(score.purity, 1 / 3)

    def test_label_count_mismatch(self):
        """Truth and assignment lengths must agree"""
        dec = decomposition([[1, 0]], np.eye(2, 6))
        with self.assertRaises(ValueError):
            score_recovery(assign_communities(dec), self.truth, dec.U, self.columns)

    def test_infer_unit_blocks(self):
        """Each V row goes to the block holding most of its mass"""
        V = np.array([
            [0.9, 0.8, 0.0, 0.1, 0.7, 0.0],
            [0.0, 0.1, 0.5, 0.5, 0.0, 0.9],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ])
        self.assertEqual(infer_unit_blocks(V, self.columns), [0, 1, UNASSIGNED])


class TestImportance(unittest.TestCase):
    """Test task importance"""

    def test_importance_order(self):
        """Tasks are ranked by output mass weighted by T"""
        T = [[1.0, 0.5], [1.0, 0.0]]
        U = [[1.0, 0.0, 0.2], [0.0, 1.0, 3.0]]
        result = task_importance(decomposition(T, U), input_block_width=2)
        self.assertEqual([r["task"] for r in result], [1, 0])
        self.assertAlmostEqual(result[0]["importance"], 1.5)
        self.assertAlmostEqual(result[1]["importance"], 0.4)

    def test_doubling_a_task_column_doubles_importance(self):
        """Importance is linear in the task's column of T"""
        rng = np.random.default_rng(2)
        T, U = rng.uniform(size=(6, 3)), rng.uniform(size=(3, 5))
        before = {r["task"]: r["importance"] for r in task_importance(decomposition(T, U), input_block_width=3)}
        T[:, 1] *= 2.0
        after = {r["task"]: r["importance"] for r in task_importance(decomposition(T, U), input_block_width=3)}
        self.assertAlmostEqual(after[1], 2.0 * before[1], places=12)
        self.assertEqual(after[0], before[0])
        self.assertEqual(after[2], before[2])

    def test_zero_output_block(self):
        """Tasks with no output mass are all unimportant"""
        U = [[1.0, 2.0, 0.0], [3.0, 0.5, 0.0]]
        result = task_importance(decomposition([[1.0, 1.0]], U), input_block_width=2)
        self.assertEqual([r["importance"] for r in result], [0.0, 0.0])
        self.assertEqual([r["task"] for r in result], [0, 1])

    def test_width_from_meta(self):
        """Input block width is read from meta or required"""
        dec = decomposition([[1.0]], [[2.0, 3.0]], input_block_width=1)
        self.assertEqual(task_importance(dec), [{"task": 0, "importance": 3.0}])
        with self.assertRaises(ValueError):
            task_importance(decomposition([[1.0]], [[2.0, 3.0]]))


if __name__ == '__main__':
    unittest.main()
