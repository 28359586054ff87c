# tests/test_verifier.py
import unittest
import sys
import os
import tempfile

import numpy as np

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from artifact_store import ArtifactStore
from engine.errors import ManifestError
from engine.nmf import NmfConfig, factorize
from engine.verifier import DecompositionVerifier, Verdict


class TestDecompositionVerifier(unittest.TestCase):
    """Test PASS/WARN/FAIL verdicts"""

    def setUp(self):
        self.V = np.random.default_rng(0).uniform(size=(6, 5))
        self.dec = factorize(self.V, NmfConfig(c0=2, a0=50))
        self.verifier = DecompositionVerifier()

    def test_clean_decomposition_passes(self):
        """A fresh decomposition passes every check"""
        report = self.verifier.verify(self.dec, self.V)
        self.assertEqual(report.verdict, Verdict.PASS)
        self.assertEqual({c.name for c in report.checks},
                         {"non_negative_factors", "monotone_objective", "source_matrix", "final_objective"})

    def test_increasing_trace_fails(self):
        """A rising objective fails and names the iteration"""
        self.dec.objective_trace[10] = self.dec.objective_trace[9] + 1.0
        report = self.verifier.verify(self.dec)
        self.assertEqual(report.verdict, Verdict.FAIL)
        check = next(c for c in report.checks if c.name == "monotone_objective")
        self.assertEqual(check.detail["first_increase_iteration"], 11)

    def test_negative_factor_fails(self):
        """A negative factor entry fails"""
        self.dec.U[0, 0] = -1e-3
        self.assertEqual(self.verifier.verify(self.dec).verdict, Verdict.FAIL)

    def test_other_matrix_fails(self):
        """A different source matrix fails the hash check"""
        report = self.verifier.verify(self.dec, self.V + 0.1)
        self.assertEqual(report.verdict, Verdict.FAIL)

    def test_zero_row_warns(self):
        """An all-zero T row only warns"""
        self.dec.T[2, :] = 0.0
        report = self.verifier.verify(self.dec)
        self.assertEqual(report.verdict, Verdict.WARN)
        self.assertEqual(report.to_dict()["verdict"], "WARN")


class TestArtifactStore(unittest.TestCase):
    """Test manifest bookkeeping"""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.store = ArtifactStore(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_record_and_verify(self):
        """Recorded outputs verify and appear in the summary"""
        path = self.store.write_json("score", {"purity": 1.0})
        self.store.record_stage("eval", [path], config={"labels": "planted"}, elapsed_ms=5)
        manifest = self.store.load_manifest()
        entry = manifest["stages"]["eval"]
        self.assertIn("score.json", entry["outputs"])
        self.assertEqual(entry["config"], {"labels": "planted"})
        self.assertEqual(manifest["tool"], "ntd")
        self.store.verify_hashes()
        self.assertEqual(self.store.get_summary()["outputs"], 1)
        self.assertEqual(self.store.events.get_recent_events(1)[0]["verdict"], "OK")

    def test_modified_file_raises(self):
        """A rewritten output raises ManifestError"""
        path = self.store.write_json("score", {"purity": 1.0})
        self.store.record_stage("eval", [path])
        self.store.write_json("score", {"purity": 0.5})
        with self.assertRaises(ManifestError):
            self.store.verify_hashes()
        self.assertEqual(self.store.check_hashes()[0]["status"], "mismatch")

    def test_stage_inputs_checked_against_producer(self):
        """An input rewritten after its stage finished raises ManifestError and logs a FAIL"""
        path = self.store.write_json("model", {"layer_sizes": [1, 1, 1]})
        self.store.record_stage("train", [path])
        self.store.verify_inputs("decompose", [path])
        recorded = self.store.load_manifest()["stages"]["train"]["outputs"]["model.json"]["sha256"]
        self.assertEqual(ArtifactStore.recorded_hash(path), recorded)

        with open(path, "a") as f:
            f.write(" ")
        with self.assertRaises(ManifestError):
            self.store.verify_inputs("decompose", [path])
        self.assertEqual(self.store.events.get_recent_events(1)[0]["stage"], "decompose")
        self.assertEqual(self.store.events.get_recent_events(1)[0]["verdict"], "FAIL")

    def test_unrecorded_inputs_are_accepted(self):
        """Files no manifest recorded, such as a user CSV, pass unchecked"""
        with tempfile.TemporaryDirectory() as other:
            csv_path = os.path.join(other, "prices.csv")
            with open(csv_path, "w") as f:
                f.write("a,b\n1,2\n")
            self.assertIsNone(ArtifactStore.recorded_hash(csv_path))
            self.store.verify_inputs("gen", [csv_path, os.path.join(other, "absent.csv")])

    def test_failure_event(self):
        """A failure is appended as a FAIL event"""
        self.store.record_failure("train", RuntimeError("boom"), 3)
        event = self.store.events.get_recent_events(1)[0]
        self.assertEqual(event["verdict"], "FAIL")
        self.assertEqual(event["detail"]["type"], "RuntimeError")
        self.assertEqual(len(self.store.events.get_events_by_verdict("FAIL")), 1)
        self.assertEqual(self.store.events.get_events_by_verdict("OK"), [])


if __name__ == '__main__':
    unittest.main()
