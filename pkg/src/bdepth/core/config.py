"""Configuration for bdepth."""

import dataclasses
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from bdepth.core.novikov import as_fraction


@dataclass
class SuiteSizes:
    """Instance counts and size bounds for the randomized property suite.

    Defaults are the acceptance sizes; tests shrink them.
    """

    circle_instances: int = 1000
    circle_max_m: int = 10
    circle_value_bound: int = 20
    periodic_instances: int = 100
    periodic_max_m: int = 6
    attainment_instances: int = 300
    attainment_max_dim: int = 6
    attainment_max_exponent: int = 10
    shift_instances: int = 100
    quasi_instances: int = 100
    tensor_instances: int = 300
    tensor_max_dim: int = 6
    quantum_instances: int = 300
    quantum_max_dim: int = 5
    signature_instances: int = 50
    signature_max_n: int = 4
    signature_grid: int = 100
    flow_instances: int = 5
    embedding_instances: int = 100
    embedding_max_support: int = 6
    workers: int = 0  # processes for instance fan-out; 0 = one per CPU


@dataclass
class DepthConfig:
    """Single configuration for every bdepth computation and command."""

    # --- Exact algebra ---
    seed: int = 0
    cutoff: Fraction | None = None  # None = automatic cutoff policy
    verify_cutoff: bool = True  # Re-run at doubled cutoff and compare gaps
    max_cutoff_doublings: int = 4
    probes: int = 50  # Random probes for basis-independence checks

    # --- Numerics ---
    tolerance: float = 1e-8
    resolution: int = 200  # Scan grid points
    steps: int = 4096  # Integrator steps over [-T, T]
    rank_threshold: float = 1e-6
    lipschitz_slack: float = 2.0
    picard_terms: int = 30

    # --- Output ---
    output_dir: Path = field(default_factory=lambda: Path("output"))
    quiet: bool = False
    verbose: bool = False

    # --- Suite ---
    suite: SuiteSizes = field(default_factory=SuiteSizes)

    def __post_init__(self) -> None:
        if isinstance(self.output_dir, str):
            self.output_dir = Path(self.output_dir)
        if self.cutoff is not None:
            self.cutoff = as_fraction(self.cutoff)

        # Environment overrides apply only to untouched defaults
        env = os.environ
        if "BDEPTH_SEED" in env and self.seed == 0:
            self.seed = int(env["BDEPTH_SEED"])
        if "BDEPTH_CUTOFF" in env and self.cutoff is None:
            self.cutoff = as_fraction(env["BDEPTH_CUTOFF"])
        if "BDEPTH_TOLERANCE" in env and self.tolerance == 1e-8:
            self.tolerance = float(env["BDEPTH_TOLERANCE"])
        if "BDEPTH_RESOLUTION" in env and self.resolution == 200:
            self.resolution = int(env["BDEPTH_RESOLUTION"])
        if "BDEPTH_OUT" in env and self.output_dir == Path("output"):
            self.output_dir = Path(env["BDEPTH_OUT"])

        if self.max_cutoff_doublings < 0:
            raise ValueError("max_cutoff_doublings must be non-negative")
        if self.steps < 2 or self.steps % 2:
            raise ValueError(f"steps must be an even integer >= 2, got {self.steps}")
        if self.resolution < 3:
            raise ValueError(f"resolution must be at least 3, got {self.resolution}")

    @classmethod
    def from_file(cls, path: Path | str) -> "DepthConfig":
        """Load configuration from a YAML file."""
        import yaml

        with open(path) as f:
            data = yaml.safe_load(f) or {}

        config = cls()

        scalar_fields = [
            "seed", "verify_cutoff", "max_cutoff_doublings", "probes",
            "tolerance", "resolution", "steps", "rank_threshold",
            "lipschitz_slack", "picard_terms", "quiet", "verbose",
        ]
        for key in scalar_fields:
            if key in data:
                setattr(config, key, data[key])

        if data.get("cutoff") is not None:
            config.cutoff = as_fraction(str(data["cutoff"]))
        if "output_dir" in data:
            config.output_dir = Path(data["output_dir"])

        # Suite sizes -- only allow known fields
        if "suite" in data and isinstance(data["suite"], dict):
            allowed = {f.name for f in dataclasses.fields(SuiteSizes)}
            suite_data = {k: v for k, v in data["suite"].items() if k in allowed}
            config.suite = SuiteSizes(**suite_data)

        return config

    @classmethod
    def load(cls, profile: str | None = None, config_path: Path | str | None = None) -> "DepthConfig":
        """Load configuration from profile or custom path.

        Search order:
            1. config_path if provided
            2. ~/.config/bdepth/{profile}.yaml
            3. ~/.config/bdepth/config.yaml
            4. Default DepthConfig()
        """
        config_dir = Path.home() / ".config" / "bdepth"

        if config_path:
            path = Path(config_path)
            if path.exists():
                return cls.from_file(path)
            raise FileNotFoundError(f"Config file not found: {path}")

        if profile:
            profile_path = (config_dir / f"{profile}.yaml").resolve()
            if not profile_path.is_relative_to(config_dir.resolve()):
                raise ValueError(f"Invalid profile name: {profile!r}")
            if profile_path.exists():
                return cls.from_file(profile_path)
            raise FileNotFoundError(f"Profile not found: {profile_path}")

        default_path = config_dir / "config.yaml"
        if default_path.exists():
            return cls.from_file(default_path)

        return cls()
