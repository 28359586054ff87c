# engine/pipeline.py
"""
Stage orchestration shared by the command line and the end-to-end tests.

Every stage reads files, writes files into one run directory and records
their hashes, its configuration and its wall-clock time in manifest.json.
Outputs other than manifest.json and events.jsonl carry no timestamps, so
re-running a stage with the same inputs and seeds rewrites identical bytes.
"""
import os
import time
from contextlib import contextmanager
from typing import Any, Dict, List, Optional, Sequence

from artifact_store import ArtifactStore
from config import Config
from utils.helpers import HelperFunctions
from utils.json_parser import JSONParser
from utils.validators import PipelineValidator, ValidationError
from .analysis import assign_communities, infer_unit_blocks, score_recovery, task_importance
from .attribution import EffectCalculator, FeatureMatrix, build_feature_matrix
from .datasets import (SyntheticSpec, dump_pgm, gen_diagrams, gen_synthetic, ground_truth_of,
                       load_dataset, save_dataset, window_csv)
from .errors import DivergedError
from .lnn import NetworkParams, TrainConfig, init_params, train
from .nmf import Decomposition, NmfConfig, factorize, normalize_rows
from .report import render_report
from .verifier import DecompositionVerifier, VerificationReport


class MissingGroundTruthError(ValidationError):
    """Evaluation asked for on a dataset without planted labels"""


class TaskDecompositionPipeline:
    """Runs pipeline stages against one run directory"""

    def __init__(self, out_dir: str, threads: Optional[int] = None):
        self.out_dir = out_dir
        self.threads = EffectCalculator.worker_count(threads)
        self.store = ArtifactStore(out_dir)
        self.parser = JSONParser()

    @contextmanager
    def _stage(self, name: str, timing: Dict[str, int]):
        start_time = time.time()
        try:
            yield
        except Exception as e:
            self.store.record_failure(name, e, int((time.time() - start_time) * 1000))
            raise
        timing["elapsed_ms"] = int((time.time() - start_time) * 1000)

    @staticmethod
    def _dataset_files(data_dir: str, split: str = "train") -> List[str]:
        keys = ("x_train", "y_train") if split == "train" else ("x_test", "y_test")
        return [os.path.join(data_dir, Config.file_name(k)) for k in keys + ("dataset",)]

    def _finish(self, stage: str, outputs: List[str], timing: Dict[str, int], **record) -> Dict[str, Any]:
        self.store.record_stage(stage, outputs, elapsed_ms=timing["elapsed_ms"], **record)
        return {"success": True, "stage": stage, "outputs": outputs, "processing_time_ms": timing["elapsed_ms"]}

    # --- generation -------------------------------------------------------

    def generate_synthetic(self, spec: SyntheticSpec) -> Dict[str, Any]:
        timing: Dict[str, int] = {}
        with self._stage("gen", timing):
            teacher, train_set, test_set, truth = gen_synthetic(spec)
            written = save_dataset(self.out_dir, train_set, test_set, truth,
                                   extra={"teacher_file": Config.file_name("teacher")})
            written["teacher"] = self.store.write_json("teacher", teacher.to_dict())
        outputs = [written[k] for k in ("x_train", "y_train", "x_test", "y_test", "teacher", "dataset")]
        result = self._finish("gen", outputs, timing, config={"source": "synthetic", **spec.to_dict()},
                              seed=spec.seed, detail={"seed_used": train_set.meta["seed_used"]})
        result.update({"i0": train_set.input_dim, "j0": train_set.output_dim,
                       "layer_sizes": teacher.layer_sizes, "seed_used": train_set.meta["seed_used"]})
        return result

    def generate_diagrams(self, classes: Optional[Sequence[str]] = None, per_class: int = 10,
                          size: int = Config.DIAGRAM_SIZE, seed: int = 0,
                          pgm_dir: Optional[str] = None) -> Dict[str, Any]:
        timing: Dict[str, int] = {}
        with self._stage("gen", timing):
            dataset = gen_diagrams(classes, per_class, size, seed)
            written = save_dataset(self.out_dir, dataset)
            pgm_files = dump_pgm(dataset, pgm_dir) if pgm_dir else []
        outputs = [written[k] for k in ("x_train", "y_train", "dataset")]
        config = {"source": "diagrams", "classes": dataset.meta["classes"], "per_class": per_class, "size": size}
        result = self._finish("gen", outputs, timing, config=config, seed=seed, detail={"pgm_files": len(pgm_files)})
        result.update({"i0": dataset.input_dim, "j0": dataset.output_dim, "pgm_files": len(pgm_files)})
        return result

    def generate_window(self, csv_path: str, input_columns: Sequence[str], target_columns: Sequence[str],
                        window: int, horizon: int = 1) -> Dict[str, Any]:
        timing: Dict[str, int] = {}
        with self._stage("gen", timing):
            dataset = window_csv(csv_path, input_columns, target_columns, window, horizon)
            written = save_dataset(self.out_dir, dataset)
        outputs = [written[k] for k in ("x_train", "y_train", "dataset")]
        config = {"source": "window", "input_columns": list(input_columns),
                  "target_columns": list(target_columns), "window": window, "horizon": horizon}
        result = self._finish("gen", outputs, timing, config=config, inputs=[csv_path])
        result.update({"i0": dataset.input_dim, "j0": dataset.output_dim, "samples": dataset.n})
        return result

    # --- training ---------------------------------------------------------

    def train(self, data_dir: str, layer_sizes: Sequence[int], config: TrainConfig) -> Dict[str, Any]:
        """model.json and train_report.json; the partial report is still written on divergence"""
        inputs = self._dataset_files(data_dir, "train")
        self.store.verify_inputs("train", inputs)
        data, manifest = load_dataset(data_dir, "train")
        message = PipelineValidator.validate_layers_for_data(layer_sizes, data.input_dim, data.output_dim)
        if message:
            raise ValidationError(message)
        test = None
        if "test" in manifest.get("shapes", {}):
            self.store.verify_inputs("train", self._dataset_files(data_dir, "test"))
            test, _ = load_dataset(data_dir, "test")

        timing: Dict[str, int] = {}
        with self._stage("train", timing):
            try:
                params, report = train(init_params(layer_sizes, seed=config.seed), data, config, test)
            except DivergedError as e:
                if e.report is not None:
                    self.store.write_json("train_report", {"train_config": config.to_dict(), **e.report.to_dict()})
                raise
            model_path = self.store.write_json("model", {**params.to_dict(), "train_config": config.to_dict()})
            report_path = self.store.write_json("train_report", {
                "train_config": config.to_dict(), "layer_sizes": list(layer_sizes), **report.to_dict()
            })
        result = self._finish("train", [model_path, report_path], timing,
                              config={"layer_sizes": list(layer_sizes), **config.to_dict()},
                              inputs=inputs, seed=config.seed,
                              detail={"final_error": report.train_errors[-1]})
        result.update({"initial_error": report.initial_error, "final_error": report.train_errors[-1],
                       "final_test_error": report.final_test_error})
        return result

    # --- attribution and factorization ------------------------------------

    def decompose(self, model_path: str, data_dir: str, nmf_config: NmfConfig,
                  split: str = "train", digits: int = 0) -> Dict[str, Any]:
        inputs = [model_path] + self._dataset_files(data_dir, split)
        self.store.verify_inputs("decompose", inputs)
        params = NetworkParams.from_dict(self.parser.read(model_path))
        data, _ = load_dataset(data_dir, split)

        timing: Dict[str, int] = {}
        with self._stage("decompose", timing):
            features = build_feature_matrix(params, data, self.threads)
            features.meta.update({"split": split, "model_sha256": HelperFunctions.sha256_file(model_path)})
            outputs = [features.to_csv(self.store.path("features")),
                       self.store.write_json("features_meta", features.sidecar())]
            if digits:
                features.to_csv(self.store.path("features_rounded"), digits=digits)

            dec = factorize(features.V, nmf_config)
            dec.meta.update({
                "unit_index": [list(key) for key in features.unit_index],
                "input_block_width": features.i0,
                "features_file": Config.file_name("features"),
                "input_names": data.meta.get("input_names"),
                "output_names": data.meta.get("output_names"),
            })
            outputs.append(self.store.write_json("decomposition", dec.to_dict()))

            assignment = assign_communities(dec)
            outputs.append(self.store.write_json("assignments", assignment.to_dict()))
            outputs.append(assignment.to_csv(self.store.path("assignments_csv")))

        result = self._finish("decompose", outputs, timing,
                              config={"split": split, "threads": self.threads, **nmf_config.to_dict()},
                              inputs=inputs, seed=nmf_config.seed,
                              detail={"objective": dec.objective_trace[-1], "restart": dec.restart})
        result.update({"k0": features.k0, "c0": dec.c0, "objective": dec.objective_trace[-1],
                       "unassigned": len(assignment.unassigned())})
        return result

    # --- reading a decomposition ------------------------------------------

    def load_decomposition(self, path: str) -> Decomposition:
        return Decomposition.from_dict(self.parser.read(path))

    def _features_of(self, dec_path: str, dec: Decomposition) -> FeatureMatrix:
        directory = os.path.dirname(dec_path)
        csv_path = os.path.join(directory, dec.meta.get("features_file", Config.file_name("features")))
        sidecar_path = os.path.join(directory, Config.file_name("features_meta"))
        sidecar = self.parser.read(sidecar_path) if os.path.exists(sidecar_path) else None
        return FeatureMatrix.from_csv(csv_path, sidecar)

    def report(self, decomposition_path: str, layout: str = "bar", data_dir: Optional[str] = None) -> Dict[str, Any]:
        inputs = [decomposition_path]
        if data_dir:
            inputs.append(os.path.join(data_dir, Config.file_name("dataset")))
        self.store.verify_inputs("report", inputs)
        dec = self.load_decomposition(decomposition_path)
        i0 = int(dec.meta["input_block_width"])
        input_names, output_names = dec.meta.get("input_names"), dec.meta.get("output_names")
        if data_dir:
            _, manifest = load_dataset(data_dir)
            meta = manifest.get("meta", {})
            input_names = meta.get("input_names", input_names)
            output_names = meta.get("output_names", output_names)

        timing: Dict[str, int] = {}
        with self._stage("report", timing):
            shown = normalize_rows(dec)
            importances = task_importance(dec, i0)
            rendered = render_report(shown.U, i0, layout, importances, input_names, output_names)
            svg_path = self.store.path("report_svg")
            with open(svg_path, "w", encoding="utf-8", newline="\n") as f:
                f.write(rendered["svg"])
            json_path = self.store.write_json("report_json", {
                **rendered["summary"],
                "importances": importances,
                "U_normalized": {"shape": list(shown.U.shape), "data": shown.U.ravel().tolist()},
            })
        return self._finish("report", [svg_path, json_path], timing, config={"layout": layout}, inputs=inputs)

    def evaluate(self, decomposition_path: str, data_dir: str, labels: str = "inferred") -> Dict[str, Any]:
        """score.json: purity, matching, concentrations and task importances"""
        directory = os.path.dirname(decomposition_path)
        inputs = [decomposition_path, os.path.join(data_dir, Config.file_name("dataset"))]
        if labels == "inferred":
            inputs += [os.path.join(directory, Config.file_name(k)) for k in ("features", "features_meta")]
        self.store.verify_inputs("eval", inputs)
        _, manifest = load_dataset(data_dir)
        truth = ground_truth_of(manifest)
        if truth is None:
            raise MissingGroundTruthError(
                f"{data_dir} has no ground-truth labels; evaluation needs a dataset from `ntd gen synthetic`"
            )
        dec = self.load_decomposition(decomposition_path)
        assignment = assign_communities(dec)
        block_columns = truth.block_columns()

        timing: Dict[str, int] = {}
        with self._stage("eval", timing):
            if labels == "planted":
                truth_labels = list(truth.hidden_labels)
                if len(truth_labels) != assignment.k0:
                    raise ValidationError(
                        f"--labels planted needs the teacher's {len(truth_labels)} hidden units, "
                        f"the decomposition has {assignment.k0}; use --labels inferred"
                    )
            elif labels == "inferred":
                truth_labels = infer_unit_blocks(self._features_of(decomposition_path, dec).V, block_columns)
            else:
                raise ValidationError(f"labels must be 'inferred' or 'planted', got {labels!r}")
            score = score_recovery(assignment, truth_labels, dec.U, block_columns)
            importances = task_importance(dec)
            path = self.store.write_json("score", {
                **score.to_dict(),
                "labels": labels,
                "c0": dec.c0,
                "blocks": truth.blocks,
                "importances": importances,
            })
        result = self._finish("eval", [path], timing, config={"labels": labels}, inputs=inputs,
                              detail={"purity": score.purity})
        result.update({"purity": score.purity, "median_concentration": score.median_concentration})
        return result

    def verify(self, decomposition_path: Optional[str] = None) -> VerificationReport:
        """Re-check the decomposition (if any) and every recorded hash, then attach the run summary"""
        dec_path = decomposition_path or self.store.path("decomposition")
        verifier = DecompositionVerifier()
        hashes = self.store.check_hashes()
        if os.path.exists(dec_path):
            dec = self.load_decomposition(dec_path)
            V = None
            try:
                V = self._features_of(dec_path, dec).V
            except FileNotFoundError:
                pass
            report = verifier.verify(dec, V, hashes)
        else:
            report = verifier.verify_manifest(hashes)
        events = self.store.events
        run = {
            **self.store.get_summary(),
            "failed_stages": sorted({e["stage"] for e in events.get_events_by_verdict("FAIL")}),
            "recent_events": events.get_recent_events(Config.VERIFY_RECENT_EVENTS),
        }
        events.log_event("verify", report.verdict.value, report.to_dict())
        report.run = run
        return report


def run_synthetic_experiment(out_dir: str, spec: Optional[SyntheticSpec] = None,
                             train_config: Optional[TrainConfig] = None,
                             nmf_config: Optional[NmfConfig] = None,
                             labels: str = "inferred") -> Dict[str, Any]:
    """Generate, train the same architecture as the teacher, decompose into one task per block, score"""
    spec = spec or SyntheticSpec()
    train_config = train_config or TrainConfig()
    nmf_config = nmf_config or NmfConfig(c0=spec.blocks)
    pipeline = TaskDecompositionPipeline(out_dir)
    generated = pipeline.generate_synthetic(spec)
    pipeline.train(out_dir, generated["layer_sizes"], train_config)
    pipeline.decompose(pipeline.store.path("model"), out_dir, nmf_config)
    scored = pipeline.evaluate(pipeline.store.path("decomposition"), out_dir, labels)
    return {"purity": scored["purity"], "median_concentration": scored["median_concentration"],
            "score": pipeline.parser.read(pipeline.store.path("score"))}

