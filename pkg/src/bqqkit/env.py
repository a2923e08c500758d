from pathlib import Path

from dotenv import dotenv_values, set_key

from .errors import ConfigError, SolverError
from .methods import METHODS
from .pubo import AnnealParams
from .runner import BenchmarkConfig

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}

_ANNEAL_KEYS = {
    "STEPS": ("n_step", int),
    "T_INIT": ("t_init", float),
    "T_FIN": ("t_fin", float),
    "ETA": ("eta", float),
    "ZETA": ("zeta", float),
}
_GENERAL_KEYS = {
    "INPUT",
    "INPUT_FORMAT",
    "METHODS",
    "BQQ_BUDGET",
    "SEEDS",
    "GROUP_ROWS",
    "GROUP_COLS",
    "SCALAR_BITS",
    "OUTPUT",
    "FORMATS",
    "ORIGINAL_SCALE",
    "RECORD_WALL_TIME",
    *_ANNEAL_KEYS,
}


def method_param_keys() -> dict[str, tuple[str, str]]:
    """``<METHOD>_<PARAM>`` key -> (method id, param name) for every registered method."""
    return {
        f"{method.id}_{param.name}".upper(): (method.id, param.name)
        for method in METHODS.values()
        for param in method.params
    }


class SweepConfigFile:
    """Sweep configuration stored in a dotenv file with comma-separated lists."""

    def __init__(self, env_file: str | Path = "sweep.env"):
        self.env_file = str(env_file)

    def _values(self) -> dict[str, str]:
        if not Path(self.env_file).is_file():
            msg = f"sweep config {self.env_file} not found"
            raise ConfigError(msg)
        return {key: value or "" for key, value in dotenv_values(self.env_file).items()}

    def _get_list(self, key: str) -> list[str]:
        """Get a comma-separated list from the config file."""
        value = self._values().get(key, "")
        return [item.strip() for item in value.split(",") if item.strip()]

    def _set_list(self, key: str, items: list):
        """Set a comma-separated list in the config file."""
        value = ",".join(str(item) for item in items)
        set_key(self.env_file, key, value)

    @staticmethod
    def _split(value: str) -> list[str]:
        return [item.strip() for item in value.split(",") if item.strip()]

    @staticmethod
    def _numbers(key: str, value: str, kind: type) -> list:
        try:
            return [kind(item) for item in SweepConfigFile._split(value)]
        except ValueError:
            msg = f"{key} must be a list of {kind.__name__} values, got {value!r}"
            raise ConfigError(msg) from None

    @staticmethod
    def _number(key: str, value: str, kind: type):
        items = SweepConfigFile._numbers(key, value, kind)
        if len(items) != 1:
            msg = f"{key} takes a single value, got {value!r}"
            raise ConfigError(msg)
        return items[0]

    @staticmethod
    def _flag(key: str, value: str) -> bool:
        lowered = value.strip().lower()
        if lowered in _TRUE:
            return True
        if lowered in _FALSE:
            return False
        msg = f"{key} must be a boolean, got {value!r}"
        raise ConfigError(msg)

    def load(self) -> BenchmarkConfig:
        """Validate the file against the sweep schema and build a ``BenchmarkConfig``.

        Raises:
            ConfigError: For unknown keys, malformed values or missing required keys
        """
        values = self._values()
        param_keys = method_param_keys()
        unknown = sorted(set(values) - _GENERAL_KEYS - set(param_keys))
        if unknown:
            msg = f"unknown key(s) in {self.env_file}: {', '.join(unknown)}"
            raise ConfigError(msg)
        for key in ("INPUT", "METHODS", "SEEDS"):
            if not values.get(key, "").strip():
                msg = f"{key} is required in {self.env_file}"
                raise ConfigError(msg)

        methods = tuple(self._get_list("METHODS"))
        unknown_methods = [m for m in methods if m not in METHODS]
        if unknown_methods:
            msg = f"unknown method(s) {', '.join(unknown_methods)}; expected {', '.join(METHODS)}"
            raise ConfigError(msg)

        grids: dict[str, dict[str, list]] = {}
        for key, (method_id, name) in param_keys.items():
            if key in values:
                kind = next(p.kind for p in METHODS[method_id].params if p.name == name)
                items = self._numbers(key, values[key], kind)
                if not items:
                    msg = f"{key} is an empty list"
                    raise ConfigError(msg)
                grids.setdefault(method_id, {})[name] = items

        anneal_overrides = {
            field: self._number(key, values[key], kind)
            for key, (field, kind) in _ANNEAL_KEYS.items()
            if key in values
        }
        try:
            anneal = AnnealParams.auto_detect(**anneal_overrides)
        except SolverError as e:
            msg = f"invalid annealing settings: {e}"
            raise ConfigError(msg) from e

        optional_ints = {
            key.lower(): self._number(key, values[key], int)
            for key in ("GROUP_ROWS", "GROUP_COLS", "SCALAR_BITS")
            if values.get(key, "").strip()
        }
        formats = tuple(self._split(values.get("FORMATS", "csv")))
        return BenchmarkConfig(
            input=values["INPUT"].strip(),
            input_format=values.get("INPUT_FORMAT", "auto").strip() or "auto",
            methods=methods,
            seeds=tuple(self._numbers("SEEDS", values["SEEDS"], int)),
            grids=grids,
            bqq_budget=tuple(self._numbers("BQQ_BUDGET", values.get("BQQ_BUDGET", ""), float)),
            anneal=anneal,
            output=values.get("OUTPUT", "").strip() or None,
            formats=formats,
            original_scale=self._flag("ORIGINAL_SCALE", values.get("ORIGINAL_SCALE", "")),
            record_wall_time=self._flag(
                "RECORD_WALL_TIME", values.get("RECORD_WALL_TIME", "")
            ),
            **optional_ints,
        )

    def write_template(self, input_source: str, methods: list[str], seeds: list[int]):
        """Write a starter config listing every parameter of the chosen methods."""
        Path(self.env_file).touch()
        set_key(self.env_file, "INPUT", input_source)
        self._set_list("METHODS", methods)
        self._set_list("SEEDS", seeds)
        for method_id in methods:
            for param in METHODS[method_id].params:
                set_key(self.env_file, f"{method_id}_{param.name}".upper(), str(param.default))
        self._set_list("FORMATS", ["csv"])
