# Copyright 2026 The Tuneplan Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Campaign documents: everything needed to rerun a tuning campaign.

A campaign is one YAML (or JSON) document, for example::

    name: synthetic-case-3
    space: synthetic
    objective:
      synthetic: {case: 3, noise_stddev: 0.1, rng_seed: 0}
    sensitivity: {variations: 100, factor: 1.1, baseline: synthetic}
    planner: {cutoff: 0.25}
    seed: 0
    parallel: 4
    out: out/synthetic_case3

`space` is `synthetic`, `rt_tddft`, a mapping `{builtin: rt_tddft, cores: 40}`
or an explicit `{routines: [...], parameters: [...], constraints: [...]}`.
The objective is either `synthetic` or `external` (`command`,
`timeout_seconds`, `env_prefix`, `repeat`, `working_dir`, `routines`).
"""

import dataclasses
import hashlib
import json
import logging
import pathlib
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml

from tuneplan.analysis import InfluenceMatrix, SensitivitySettings
from tuneplan.campaigns import bundled
from tuneplan.enums import VariationStrategy
from tuneplan.errors import CampaignError
from tuneplan.objectives import (
    ExternalCommandSpec,
    ExternalObjective,
    Objective,
    SyntheticCase,
    SyntheticObjective,
    synthetic_baseline,
)
from tuneplan.planner import PlannerSettings
from tuneplan.search import DEFAULT_CANDIDATE_POOL
from tuneplan.space import (
    SYNTHETIC_GROUPS,
    Configuration,
    SearchSpace,
    rt_tddft_space,
    synthetic_space,
)
from tuneplan.surrogate import SurrogateSettings

logger = logging.getLogger(__name__)

_KNOWN_KEYS = {
    "name",
    "space",
    "objective",
    "routines",
    "sensitivity",
    "planner",
    "search",
    "seed",
    "parallel",
    "out",
    "influence_matrix",
}

# command-line override -> location in the document
OVERRIDES = {
    "seed": ("seed",),
    "cutoff": ("planner", "cutoff"),
    "budget_multiplier": ("planner", "budget_multiplier"),
    "dim_cap": ("planner", "dim_cap"),
    "parallel": ("parallel",),
    "out": ("out",),
    "variations": ("sensitivity", "variations"),
    "case": ("objective", "synthetic", "case"),
    "noise_stddev": ("objective", "synthetic", "noise_stddev"),
}


@dataclasses.dataclass(frozen=True)
class ObjectiveBinding:
    """Which objective a campaign tunes.

    Exactly one of `synthetic` and `external` is set.
    """

    synthetic: Optional[SyntheticCase] = None
    external: Optional[ExternalCommandSpec] = None
    routines: Tuple[str, ...] = ()

    def build(self, space: SearchSpace, routines: Tuple[str, ...] = ()) -> Objective:
        if self.synthetic is not None:
            return SyntheticObjective(self.synthetic)
        return ExternalObjective(self.external, space, self.routines or routines)

    def to_dict(self) -> Dict[str, Any]:
        if self.synthetic is not None:
            return {"synthetic": dataclasses.asdict(self.synthetic)}
        return {
            "external": dataclasses.asdict(self.external),
            "routines": list(self.routines),
        }


@dataclasses.dataclass(frozen=True)
class CampaignConfig:
    name: str
    space: SearchSpace
    objective: ObjectiveBinding
    routines: Tuple[str, ...]
    sensitivity: SensitivitySettings = SensitivitySettings()
    planner: PlannerSettings = PlannerSettings()
    surrogate: SurrogateSettings = SurrogateSettings()
    candidate_pool: int = DEFAULT_CANDIDATE_POOL
    seed: int = 0
    parallel: int = 1
    out_dir: pathlib.Path = pathlib.Path("out")
    influence_matrix: Optional[pathlib.Path] = None

    def build_objective(self) -> Objective:
        return self.objective.build(self.space, self.routines)

    def load_influence(self) -> Optional[InfluenceMatrix]:
        """The influence matrix named by the campaign, if any."""
        if self.influence_matrix is None:
            return None
        with open(self.influence_matrix, encoding="utf-8") as f:
            return InfluenceMatrix.from_dict(json.load(f))

    def result_affecting(self) -> Dict[str, Any]:
        """Every setting that can change an evaluation or a search result."""
        sensitivity = self.sensitivity
        out = {
            "space": self.space.to_dict(),
            "objective": self.objective.to_dict(),
            "routines": list(self.routines),
            "sensitivity": {
                "variations": sensitivity.variations,
                "strategy": sensitivity.strategy.value,
                "factor": sensitivity.factor,
                "explicit": {k: list(v) for k, v in sensitivity.explicit.items()},
                "baseline": (
                    None
                    if sensitivity.baseline is None
                    else sensitivity.baseline.to_dict()
                ),
                "seed": sensitivity.seed,
            },
            "planner": self.planner.to_dict(),
            "surrogate": dataclasses.asdict(self.surrogate),
            "candidate_pool": self.candidate_pool,
            "seed": self.seed,
        }
        if self.influence_matrix is not None:
            out["influence_matrix"] = hashlib.sha256(
                pathlib.Path(self.influence_matrix).read_bytes()
            ).hexdigest()
        return out

    @property
    def digest(self) -> str:
        """SHA-256 of the canonical JSON of `result_affecting()`."""
        text = json.dumps(
            self.result_affecting(), sort_keys=True, separators=(",", ":")
        )
        return hashlib.sha256(text.encode()).hexdigest()

    @classmethod
    def load(
        cls, path: Any, overrides: Optional[Mapping[str, Any]] = None
    ) -> "CampaignConfig":
        """Reads a campaign document and applies command-line overrides.

        Raises:
            FileNotFoundError: the document does not exist.
            CampaignError: the document or an override is invalid.
        """
        path = pathlib.Path(path)
        with open(path, encoding="utf-8") as f:
            try:
                data = yaml.safe_load(f)
            except yaml.YAMLError as e:
                raise CampaignError(f"{path} is not valid YAML: {e}") from e
        return cls.from_dict(data, overrides, base_dir=path.parent)

    @classmethod
    def from_dict(
        cls,
        data: Any,
        overrides: Optional[Mapping[str, Any]] = None,
        base_dir: Optional[pathlib.Path] = None,
    ) -> "CampaignConfig":
        if not isinstance(data, Mapping):
            raise CampaignError("A campaign document must be a mapping")
        data = json.loads(json.dumps(data))
        unknown = set(data) - _KNOWN_KEYS
        if unknown:
            raise CampaignError(f"Unknown campaign keys: {', '.join(sorted(unknown))}")
        apply_overrides(data, overrides or {})
        try:
            return _parse(data, base_dir or pathlib.Path("."))
        except CampaignError:
            raise
        except (KeyError, TypeError, ValueError) as e:
            raise CampaignError(f"Invalid campaign: {e}") from e


def apply_overrides(data: Dict[str, Any], overrides: Mapping[str, Any]) -> None:
    """Writes overrides into a raw campaign document, in place.

    Raises:
        CampaignError: unknown override, or one that does not apply.
    """
    for key, value in overrides.items():
        if value is None:
            continue
        if key not in OVERRIDES:
            raise CampaignError(f"Unknown override {key}")
        where = OVERRIDES[key]
        node = data
        for step in where[:-1]:
            if where[0] == "objective" and step not in node:
                raise CampaignError(f"Override {key} needs a synthetic objective")
            node = node.setdefault(step, {})
            if not isinstance(node, dict):
                raise CampaignError(f"Override {key} does not fit the campaign")
        node[where[-1]] = value


def _parse_space(spec: Any) -> SearchSpace:
    if spec == "synthetic":
        return synthetic_space()
    if spec == "rt_tddft":
        return rt_tddft_space()
    if isinstance(spec, Mapping) and "builtin" in spec:
        options = {k: v for k, v in spec.items() if k != "builtin"}
        if spec["builtin"] == "synthetic" and not options:
            return synthetic_space()
        if spec["builtin"] == "rt_tddft":
            return rt_tddft_space(**options)
        raise CampaignError(f"Unknown builtin space {spec['builtin']}")
    if isinstance(spec, Mapping):
        return SearchSpace.from_dict(spec)
    raise CampaignError("space must be synthetic, rt_tddft or a mapping")


def _parse_objective(spec: Any) -> ObjectiveBinding:
    if not isinstance(spec, Mapping) or len(set(spec) & {"synthetic", "external"}) != 1:
        raise CampaignError("objective needs exactly one of synthetic and external")
    if "synthetic" in spec:
        synthetic = dict(spec["synthetic"])
        if "case" in synthetic:
            synthetic["case_id"] = synthetic.pop("case")
        return ObjectiveBinding(synthetic=SyntheticCase(**synthetic))
    external = dict(spec["external"])
    routines = tuple(external.pop("routines", spec.get("routines", ())))
    if "command" in external:
        external["command_template"] = external.pop("command")
    return ObjectiveBinding(external=ExternalCommandSpec(**external), routines=routines)


def _parse_sensitivity(
    spec: Mapping[str, Any], space: SearchSpace
) -> SensitivitySettings:
    spec = dict(spec)
    baseline = spec.pop("baseline", None)
    if baseline == "synthetic":
        baseline = synthetic_baseline()
    elif baseline == "defaults":
        baseline = space.defaults()
    elif isinstance(baseline, Mapping):
        baseline = space.defaults().updated(baseline)
    elif baseline is not None:
        raise CampaignError(
            "sensitivity baseline must be synthetic, defaults or a mapping"
        )
    if "strategy" in spec:
        spec["strategy"] = VariationStrategy(spec["strategy"])
    return SensitivitySettings(baseline=baseline, **spec)


def _resolve_file(name: str, base_dir: pathlib.Path) -> pathlib.Path:
    local = base_dir / name
    if local.is_file():
        return local
    try:
        return bundled(name)
    except FileNotFoundError:
        raise CampaignError(f"No file {name} next to the campaign or bundled") from None


def _parse(data: Dict[str, Any], base_dir: pathlib.Path) -> CampaignConfig:
    for key in ("space", "objective"):
        if key not in data:
            raise CampaignError(f"A campaign needs a {key} entry")
    space = _parse_space(data["space"])
    objective = _parse_objective(data["objective"])
    routines = tuple(data.get("routines", ()))
    if not routines:
        if objective.synthetic is not None:
            routines = SYNTHETIC_GROUPS
        else:
            routines = objective.routines or tuple(
                r.name for r in space.routines if r.measured
            )
    search = dict(data.get("search", {}))
    surrogate = SurrogateSettings(
        starts=int(search.pop("surrogate_starts", 8)),
        max_iterations=int(search.pop("surrogate_iterations", 200)),
        fixed_noise=search.pop("fixed_noise", None),
    )
    candidate_pool = int(search.pop("candidate_pool", DEFAULT_CANDIDATE_POOL))
    if search:
        raise CampaignError(f"Unknown search keys: {', '.join(sorted(search))}")
    parallel = int(data.get("parallel", 1))
    if parallel < 1:
        raise CampaignError("parallel must be at least 1")
    matrix = data.get("influence_matrix")
    config = CampaignConfig(
        name=str(data.get("name", "campaign")),
        space=space,
        objective=objective,
        routines=routines,
        sensitivity=_parse_sensitivity(data.get("sensitivity", {}), space),
        planner=PlannerSettings.from_dict(data.get("planner", {})),
        surrogate=surrogate,
        candidate_pool=candidate_pool,
        seed=int(data.get("seed", 0)),
        parallel=parallel,
        out_dir=pathlib.Path(data.get("out", "out")),
        influence_matrix=None if matrix is None else _resolve_file(matrix, base_dir),
    )
    unknown = [r for r in config.routines if r not in space.routine_names]
    if unknown:
        raise CampaignError(f"Routines {', '.join(unknown)} are not declared")
    logger.debug("Loaded campaign %s (digest %s)", config.name, config.digest[:12])
    return config


def load_bundled(name: str, overrides: Optional[Mapping[str, Any]] = None):
    """A campaign shipped with tuneplan, e.g. "synthetic_case3.yaml"."""
    return CampaignConfig.load(bundled(name), overrides)
