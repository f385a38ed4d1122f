"""
Experiment configuration.

Values come from three layers, later ones winning: the field defaults, an
optional flat YAML mapping (``--config``), and command-line flags. Each field
may have a ``clean_<field>`` method that returns the normalized value or
raises ``ValidationError``.
"""
import dataclasses
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import tasep
from .exceptions import ValidationError
from .fredholm import MIN_NODES, MIN_SPAN, S_MAX, S_MIN
from .rmt import EnsembleKind


logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


@dataclass
class ExperimentConfig:
    subcommand: str = None
    seed: int = 20100531
    t: float = 1000.0
    runs: int = 1000
    N: int = 100
    rho: float = 0.5
    u_max: float = 4.0
    du: float = 0.25
    n_quad: int = 80
    M: float = 16.0
    out: str = None
    ic: str = tasep.STEP
    ensemble: str = EnsembleKind.GUE.value
    s_min: float = -6.0
    s_max: float = 4.0
    ds: float = 0.1
    bin_width: float = 0.05
    times: list = field(default_factory=lambda: [250.0, 500.0, 1000.0, 2000.0])
    u: float = 0.0
    batches: int = 8

    #
    # Loading

    @classmethod
    def field_names(cls):
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def load_file(cls, path):
        try:
            with open(path, encoding='utf-8') as handle:
                data = yaml.safe_load(handle)
        except OSError as e:
            raise ValidationError("config: cannot read %s: %s" % (path, e))
        except yaml.YAMLError as e:
            raise ValidationError("config: %s is not valid YAML: %s" % (path, e))
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ValidationError("config: %s must hold a flat mapping" % path)
        unknown = sorted(set(data) - set(cls.field_names()))
        if unknown:
            raise ValidationError("config: unknown keys %s" % ', '.join(map(str, unknown)))
        return data

    @classmethod
    def from_sources(cls, subcommand, flags=None, path=None):
        values = {}
        if path:
            values.update(cls.load_file(path))
            logger.debug("config file %s: %s", path, values)
        values.update({k: v for k, v in (flags or {}).items() if v is not None})
        values['subcommand'] = subcommand
        config = cls(**values)
        config.full_clean()
        return config

    def full_clean(self):
        errors = []
        for name in self.field_names():
            cleaner = getattr(self, 'clean_%s' % name, None)
            if cleaner is None:
                continue
            try:
                setattr(self, name, cleaner(getattr(self, name)))
            except ValidationError as e:
                errors.append(str(e))
            except (TypeError, ValueError) as e:
                errors.append("%s: %s" % (name, e))
        if not errors:
            try:
                self.clean()
            except ValidationError as e:
                errors.append(str(e))
        if errors:
            raise ValidationError('; '.join(errors))
        return self

    #
    # Field cleaning

    @staticmethod
    def _positive(name, value, cast=float):
        value = cast(value)
        if cast is int and isinstance(value, bool):
            raise ValidationError("%s must be a number" % name)
        if not (math.isfinite(value) and value > 0):
            raise ValidationError("%s must be positive, got %r" % (name, value))
        return value

    @staticmethod
    def _integer(name, value):
        if isinstance(value, float) and not value.is_integer():
            raise ValidationError("%s must be an integer, got %r" % (name, value))
        return int(value)

    def clean_seed(self, value):
        value = self._integer('seed', value)
        if not 0 <= value < SEED_LIMIT:
            raise ValidationError("seed must be a 64-bit unsigned integer, got %r" % value)
        return value

    def clean_t(self, value):
        return self._positive('t', value)

    def clean_runs(self, value):
        return self._positive('runs', self._integer('runs', value), int)

    def clean_N(self, value):
        return self._positive('N', self._integer('N', value), int)

    def clean_rho(self, value):
        value = float(value)
        if not 0.0 < value < 1.0:
            raise ValidationError("rho must lie in (0, 1), got %r" % value)
        return value

    def clean_u_max(self, value):
        return self._positive('u_max', value)

    def clean_du(self, value):
        return self._positive('du', value)

    def clean_n_quad(self, value):
        value = self._integer('n_quad', value)
        if value < MIN_NODES:
            raise ValidationError("n_quad must be at least %d, got %r" % (MIN_NODES, value))
        return value

    def clean_M(self, value):
        value = float(value)
        if not value >= MIN_SPAN:
            raise ValidationError("M must be at least %g, got %r" % (MIN_SPAN, value))
        return value

    def clean_ic(self, value):
        name = tasep.ALIASES.get(value, value)
        if name not in tasep.VARIANTS:
            raise ValidationError("ic must be one of step, flat, stat; got %r" % (value,))
        return name

    def clean_ensemble(self, value):
        try:
            return EnsembleKind(str(value).lower()).value
        except ValueError:
            raise ValidationError("ensemble must be gue or goe, got %r" % (value,))

    def clean_ds(self, value):
        return self._positive('ds', value)

    def clean_bin_width(self, value):
        return self._positive('bin_width', value)

    def clean_times(self, value):
        if isinstance(value, str):
            value = [v for v in value.split(',') if v.strip()]
        times = sorted(float(v) for v in value)
        if len(times) < 2 or times[0] <= 0 or len(set(times)) != len(times):
            raise ValidationError("times must hold at least two distinct positive values")
        return times

    def clean_batches(self, value):
        value = self._integer('batches', value)
        if value < 8:
            raise ValidationError("batches must be at least 8, got %r" % value)
        return value

    def clean_u(self, value):
        value = float(value)
        if not math.isfinite(value):
            raise ValidationError("u must be finite")
        return value

    def clean(self):
        if self.u_max < self.du:
            raise ValidationError("u_max must be at least du (%g < %g)" % (self.u_max, self.du))
        if not S_MIN <= self.s_min < self.s_max <= S_MAX:
            raise ValidationError("need %g <= s_min < s_max <= %g" % (S_MIN, S_MAX))

    #
    # Derived values

    @property
    def u_grid(self):
        count = int(math.floor(self.u_max / self.du + 1e-9))
        return np.round(np.arange(count + 1) * self.du, 12)

    @property
    def s_grid(self):
        count = int(math.floor((self.s_max - self.s_min) / self.ds + 1e-9))
        return np.round(self.s_min + np.arange(count + 1) * self.ds, 12)

    def header_items(self):
        """Sorted (name, value) pairs of every parameter except the output path."""
        return sorted((k, v) for k, v in dataclasses.asdict(self).items() if k != 'out')
