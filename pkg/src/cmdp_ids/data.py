"""Flow-record ingestion, cleaning, encoding and splitting.

Pipeline: ``load_csv`` -> ``clean_unsw`` / ``clean_botiot`` -> ``split_indices``
on the cleaned labels -> ``encode`` (fit on train, apply to test) ->
``save_dataset``.
"""

import ipaddress
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from . import container
from .errors import IngestError, LabelError, SchemaError

log = logging.getLogger(__name__)

KINDS = ("numeric", "categorical", "ip_address", "port", "label", "ignore")
MISSING_POLICIES = ("drop_row", "impute_mean", "map_to_value")


@dataclass(frozen=True)
class ColumnSchema:
    name: str
    kind: str
    missing_policy: str = "drop_row"
    fill_value: object = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.missing_policy not in MISSING_POLICIES:
            raise SchemaError(f"column {self.name!r}: unknown missing policy {self.missing_policy!r}")


@dataclass(frozen=True)
class DatasetSchema:
    name: str
    columns: tuple
    label_names: tuple
    has_header: bool = False

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "label_names", tuple(self.label_names))
        n_labels = sum(c.kind == "label" for c in self.columns)
        if n_labels != 1:
            raise SchemaError(f"schema {self.name!r} needs exactly one label column, has {n_labels}")

    @property
    def label_column(self):
        return next(c.name for c in self.columns if c.kind == "label")

    def names(self, *kinds):
        return [c.name for c in self.columns if c.kind in kinds]

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise SchemaError(f"schema {self.name!r} has no column {name!r}")

    def without(self, name):
        return DatasetSchema(self.name, [c for c in self.columns if c.name != name],
                             self.label_names, self.has_header)


def normalise_name(name):
    return str(name).strip().lower().replace(" ", "").replace("-", "_")


# --------------------------------------------------------------------------
# built-in dataset profiles
# --------------------------------------------------------------------------

UNSW_LABELS = ("Normal", "Fuzzers", "DoS", "Exploits", "Generic", "Reconnaissance")
BOTIOT_LABELS = ("DDoS", "DoS", "Normal", "Theft", "Reconnaissance")

_UNSW_COLUMNS = [
    ("srcip", "ip_address"), ("sport", "port"), ("dstip", "ip_address"), ("dsport", "port"),
    ("proto", "categorical"), ("state", "categorical"), ("dur", "numeric"),
    ("sbytes", "numeric"), ("dbytes", "numeric"), ("sttl", "numeric"), ("dttl", "numeric"),
    ("sloss", "numeric"), ("dloss", "numeric"), ("service", "categorical"),
    ("sload", "numeric"), ("dload", "numeric"), ("spkts", "numeric"), ("dpkts", "numeric"),
    ("swin", "numeric"), ("dwin", "numeric"), ("stcpb", "numeric"), ("dtcpb", "numeric"),
    ("smeansz", "numeric"), ("dmeansz", "numeric"), ("trans_depth", "numeric"),
    ("res_bdy_len", "numeric"), ("sjit", "numeric"), ("djit", "numeric"),
    ("stime", "numeric"), ("ltime", "numeric"), ("sintpkt", "numeric"), ("dintpkt", "numeric"),
    ("tcprtt", "numeric"), ("synack", "numeric"), ("ackdat", "numeric"),
    ("is_sm_ips_ports", "numeric"), ("ct_state_ttl", "numeric"),
    ("ct_flw_http_mthd", "numeric"), ("is_ftp_login", "numeric"), ("ct_ftp_cmd", "numeric"),
    ("ct_srv_src", "numeric"), ("ct_srv_dst", "numeric"), ("ct_dst_ltm", "numeric"),
    ("ct_src_ltm", "numeric"), ("ct_src_dport_ltm", "numeric"), ("ct_dst_sport_ltm", "numeric"),
    ("ct_dst_src_ltm", "numeric"), ("attack_cat", "label"),
    # the binary attack flag duplicates the target and is never a feature
    ("label", "ignore"),
]
_UNSW_MISSING = {
    "ct_ftp_cmd": ("map_to_value", 7.0),
    "attack_cat": ("map_to_value", "Normal"),
    "ct_flw_http_mthd": ("impute_mean", None),
}

_BOTIOT_COLUMNS = [
    ("pkseqid", "ignore"), ("stime", "numeric"), ("flgs", "categorical"),
    ("flgs_number", "numeric"), ("proto", "categorical"), ("proto_number", "numeric"),
    ("saddr", "ip_address"), ("sport", "port"), ("daddr", "ip_address"), ("dport", "port"),
    ("pkts", "numeric"), ("bytes", "numeric"), ("state", "categorical"),
    ("state_number", "numeric"), ("ltime", "numeric"), ("seq", "numeric"), ("dur", "numeric"),
    ("mean", "numeric"), ("stddev", "numeric"), ("sum", "numeric"), ("min", "numeric"),
    ("max", "numeric"), ("spkts", "numeric"), ("dpkts", "numeric"), ("sbytes", "numeric"),
    ("dbytes", "numeric"), ("rate", "numeric"), ("srate", "numeric"), ("drate", "numeric"),
    ("attack", "ignore"), ("category", "label"), ("subcategory", "ignore"),
]


def _build(name, cols, labels, missing=None, has_header=False):
    missing = missing or {}
    out = []
    for col, kind in cols:
        policy, value = missing.get(col, ("drop_row", None))
        out.append(ColumnSchema(col, kind, policy, value))
    return DatasetSchema(name, out, labels, has_header)


UNSW_SCHEMA = _build("unsw-nb15", _UNSW_COLUMNS, UNSW_LABELS, _UNSW_MISSING, has_header=False)
BOTIOT_SCHEMA = _build("bot-iot", _BOTIOT_COLUMNS, BOTIOT_LABELS, has_header=True)


def synthetic_schema(n_features, n_classes):
    cols = [(f"f{i}", "numeric") for i in range(n_features)] + [("label", "label")]
    return _build("synthetic", cols, tuple(f"class{c}" for c in range(n_classes)), has_header=True)


# --------------------------------------------------------------------------
# ingestion
# --------------------------------------------------------------------------

@dataclass
class RawTable:
    """Typed cells (NaN / None = missing) plus parse diagnostics.

    Numeric columns are float64. Port, IP, categorical and label columns stay
    as stripped strings so the cleaning rules can inspect their raw form.
    ``malformed`` holds positional row indices whose numeric cells failed to
    parse; ``bad_lines`` counts lines the tokenizer could not split.
    """
    frame: pd.DataFrame
    schema: DatasetSchema
    malformed: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    bad_lines: list = field(default_factory=list)
    ignored_columns: list = field(default_factory=list)

    def __len__(self):
        return len(self.frame)


def _read_strings(path, schema):
    bad = []
    header = 0 if schema.has_header else None
    kw = dict(header=header, dtype=str, keep_default_na=False, na_filter=False,
              skipinitialspace=False, encoding="latin1")
    try:
        try:
            df = pd.read_csv(path, **kw)
        except pd.errors.ParserError:
            if hasattr(path, "seek"):
                path.seek(0)
            df = pd.read_csv(path, engine="python", on_bad_lines=lambda line: bad.append(line) and None, **kw)
    except FileNotFoundError:
        raise IngestError(f"cannot read {path}: no such file") from None
    except pd.errors.EmptyDataError:
        raise IngestError(f"{path} is empty") from None
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as exc:
        raise IngestError(f"cannot read {path}: {exc}") from None
    if df.shape[0] == 0:
        raise IngestError(f"{path} contains no data rows")
    return df, bad


def load_csv(path, schema):
    """Read a CSV and type its cells according to ``schema``."""
    df, bad = _read_strings(path, schema)
    ignored = []
    wanted = [c.name for c in schema.columns]
    if schema.has_header:
        df.columns = [normalise_name(c) for c in df.columns]
        absent = [n for n in wanted if n not in df.columns]
        if absent:
            raise IngestError(f"{path}: header lacks schema columns {absent}")
        ignored = [c for c in df.columns if c not in wanted]
        df = df[wanted]
    else:
        if df.shape[1] != len(wanted):
            raise IngestError(f"{path}: {df.shape[1]} columns, schema {schema.name!r} expects {len(wanted)}")
        df.columns = wanted
    df = df.reset_index(drop=True)

    out = {}
    bad_rows = np.zeros(len(df), dtype=bool)
    for col in schema.columns:
        s = df[col.name].astype(str).str.strip()
        blank = s == ""
        if col.kind == "numeric":
            num = pd.to_numeric(s.where(~blank), errors="coerce")
            bad_rows |= (num.isna() & ~blank).to_numpy()
            out[col.name] = num.astype(np.float64)
        else:
            out[col.name] = s.where(~blank, None)
    frame = pd.DataFrame(out)
    malformed = np.flatnonzero(bad_rows)
    if len(malformed) or bad:
        log.warning("%s: %d malformed rows, %d unsplittable lines", path, len(malformed), len(bad))
    return RawTable(frame, schema, malformed, bad, ignored)


def concat_tables(tables):
    """Stack several ingested parts (e.g. the four UNSW-NB15 CSVs) into one table."""
    if len(tables) == 1:
        return tables[0]
    offsets = np.cumsum([0] + [len(t) for t in tables[:-1]])
    return RawTable(
        pd.concat([t.frame for t in tables], ignore_index=True),
        tables[0].schema,
        np.concatenate([t.malformed + off for t, off in zip(tables, offsets)]).astype(np.int64),
        [line for t in tables for line in t.bad_lines],
        sorted({c for t in tables for c in t.ignored_columns}),
    )


def table_from_frame(frame, schema):
    """Build a :class:`RawTable` from an in-memory frame of strings/numbers."""
    import io
    buf = io.StringIO()
    frame.to_csv(buf, index=False, header=schema.has_header)
    buf.seek(0)
    return load_csv(buf, schema)


# --------------------------------------------------------------------------
# cleaning
# --------------------------------------------------------------------------

@dataclass
class CleaningReport:
    rows_in: int = 0
    rows_dropped: dict = field(default_factory=dict)
    columns_dropped: list = field(default_factory=list)
    values_imputed: dict = field(default_factory=dict)
    values_remapped: dict = field(default_factory=dict)
    class_counts: dict = field(default_factory=dict)

    @property
    def rows_out(self):
        return self.rows_in - sum(self.rows_dropped.values())

    def drop(self, rule, count):
        self.rows_dropped[rule] = self.rows_dropped.get(rule, 0) + int(count)

    def to_dict(self):
        return {
            "rows_in": self.rows_in,
            "rows_dropped": dict(self.rows_dropped),
            "rows_out": self.rows_out,
            "columns_dropped": list(self.columns_dropped),
            "values_imputed": dict(self.values_imputed),
            "values_remapped": dict(self.values_remapped),
            "class_counts": dict(self.class_counts),
        }

    def render(self):
        lines = [f"rows in:  {self.rows_in}"]
        for rule, n in self.rows_dropped.items():
            lines.append(f"  dropped [{rule}]: {n}")
        lines.append(f"rows out: {self.rows_out}")
        if self.columns_dropped:
            lines.append(f"columns dropped: {', '.join(self.columns_dropped)}")
        for col, n in self.values_imputed.items():
            lines.append(f"imputed {col}: {n}")
        for col, n in self.values_remapped.items():
            lines.append(f"remapped {col}: {n}")
        for cls, n in self.class_counts.items():
            lines.append(f"  class {cls}: {n}")
        return "\n".join(lines)


def _require(table, names):
    absent = [n for n in names if n not in table.frame.columns]
    if absent:
        raise SchemaError(f"required columns absent: {absent}")


def _keep(frame, mask, report, rule):
    report.drop(rule, int((~mask).sum()))
    return frame[mask].reset_index(drop=True)


def _canonical_labels(series, label_names):
    lookup = {n.lower(): n for n in label_names}
    return series.map(lambda v: lookup.get(str(v).strip().lower()) if v is not None else None)


def _parse_port(value, allow_hex):
    if value is None:
        return np.nan
    v = str(value).strip()
    if v.isdigit():
        return float(int(v))
    if allow_hex and v.lower().startswith("0x"):
        try:
            return float(int(v, 16))
        except ValueError:
            return np.nan
    return np.nan


def _valid_ipv4(value):
    if value is None:
        return False
    try:
        ipaddress.IPv4Address(str(value).strip())
    except ValueError:
        return False
    return True


def _drop_malformed(table, report):
    frame = table.frame
    mask = np.ones(len(frame), dtype=bool)
    mask[table.malformed] = False
    return _keep(frame, mask, report, "malformed")


def _finish(frame, schema, report, label_col):
    ips = schema.names("ip_address")
    if ips:
        ok = np.ones(len(frame), dtype=bool)
        for c in ips:
            ok &= frame[c].map(_valid_ipv4).to_numpy(dtype=bool)
        frame = _keep(frame, ok, report, "invalid_ip")
    counts = frame[label_col].value_counts()
    report.class_counts = {n: int(counts.get(n, 0)) for n in schema.label_names}
    return frame


def clean_unsw(table):
    """Apply the UNSW-NB15 rectification and removal rules, in order."""
    schema = table.schema
    ports = ["sport", "dsport"]
    _require(table, ["ct_ftp_cmd", "attack_cat", "ct_flw_http_mthd", "is_ftp_login", *ports])
    report = CleaningReport(rows_in=len(table))
    frame = _drop_malformed(table, report)

    nulls = frame["ct_ftp_cmd"].isna()
    frame.loc[nulls, "ct_ftp_cmd"] = schema.column("ct_ftp_cmd").fill_value
    report.values_remapped["ct_ftp_cmd"] = int(nulls.sum())

    nulls = frame["attack_cat"].isna()
    frame.loc[nulls, "attack_cat"] = schema.column("attack_cat").fill_value
    report.values_remapped["attack_cat"] = int(nulls.sum())

    nulls = frame["ct_flw_http_mthd"].isna()
    frame.loc[nulls, "ct_flw_http_mthd"] = frame["ct_flw_http_mthd"].mean()
    report.values_imputed["ct_flw_http_mthd"] = int(nulls.sum())

    for c in ports:
        frame[c] = frame[c].map(lambda v: _parse_port(v, allow_hex=False)).astype(np.float64)
    frame = _keep(frame, frame[ports].notna().all(axis=1).to_numpy(), report, "non_numeric_port")

    frame = frame.drop(columns=["is_ftp_login"])
    report.columns_dropped.append("is_ftp_login")
    schema = schema.without("is_ftp_login")

    frame = _keep(frame, frame.notna().all(axis=1).to_numpy(), report, "missing_value")

    frame["attack_cat"] = _canonical_labels(frame["attack_cat"], schema.label_names)
    frame = _keep(frame, frame["attack_cat"].notna().to_numpy(), report, "class_filter")
    frame = _finish(frame, schema, report, "attack_cat")
    return RawTable(frame, schema), report


def clean_botiot(table):
    """Keep the five BoT-IoT categories and drop incomplete rows."""
    schema = table.schema
    label_col = schema.label_column
    ports = schema.names("port")
    _require(table, [label_col, *ports])
    report = CleaningReport(rows_in=len(table))
    frame = _drop_malformed(table, report)
    for c in ports:
        frame[c] = frame[c].map(lambda v: _parse_port(v, allow_hex=True)).astype(np.float64)
    used = [c.name for c in schema.columns if c.kind != "ignore"]
    frame = _keep(frame, frame[used].notna().all(axis=1).to_numpy(), report, "missing_value")
    frame[label_col] = _canonical_labels(frame[label_col], schema.label_names)
    frame = _keep(frame, frame[label_col].notna().to_numpy(), report, "class_filter")
    frame = _finish(frame, schema, report, label_col)
    return RawTable(frame, schema), report


def clean_generic(table):
    """Apply per-column missing policies only (used by the synthetic profile)."""
    schema = table.schema
    report = CleaningReport(rows_in=len(table))
    frame = _drop_malformed(table, report)
    for col in schema.columns:
        nulls = frame[col.name].isna()
        if not nulls.any():
            continue
        if col.missing_policy == "map_to_value":
            frame.loc[nulls, col.name] = col.fill_value
            report.values_remapped[col.name] = int(nulls.sum())
        elif col.missing_policy == "impute_mean":
            frame.loc[nulls, col.name] = frame[col.name].mean()
            report.values_imputed[col.name] = int(nulls.sum())
    used = [c.name for c in schema.columns if c.kind != "ignore"]
    frame = _keep(frame, frame[used].notna().all(axis=1).to_numpy(), report, "missing_value")
    label_col = schema.label_column
    frame[label_col] = _canonical_labels(frame[label_col], schema.label_names)
    frame = _keep(frame, frame[label_col].notna().to_numpy(), report, "class_filter")
    frame = _finish(frame, schema, report, label_col)
    return RawTable(frame, schema), report


CLEANERS = {"unsw-nb15": clean_unsw, "bot-iot": clean_botiot, "synthetic": clean_generic}


# --------------------------------------------------------------------------
# encoding
# --------------------------------------------------------------------------

def ip_to_int(value):
    """Dotted-quad IPv4 string to its unsigned 32-bit value."""
    return int(ipaddress.IPv4Address(str(value).strip()))


@dataclass
class Normalizer:
    """Frozen encoding state: one-hot vocabularies and per-feature min/max."""
    vocabularies: dict
    feature_names: list
    mins: np.ndarray
    maxs: np.ndarray

    def to_meta(self):
        return {"vocabularies": self.vocabularies, "feature_names": self.feature_names}

    @classmethod
    def from_meta(cls, meta, mins, maxs):
        return cls(dict(meta["vocabularies"]), list(meta["feature_names"]),
                   np.asarray(mins, dtype=np.float64), np.asarray(maxs, dtype=np.float64))


@dataclass
class EncodedDataset:
    matrix: np.ndarray
    labels: np.ndarray
    label_names: tuple
    feature_names: list
    normalizer: Normalizer

    def __len__(self):
        return self.labels.shape[0]

    @property
    def n_classes(self):
        return len(self.label_names)

    @property
    def n_features(self):
        return self.matrix.shape[1]

    def subset(self, idx):
        return EncodedDataset(self.matrix[idx], self.labels[idx], self.label_names,
                              self.feature_names, self.normalizer)


def _raw_features(frame, schema, vocabularies):
    blocks, names = [], []
    for col in schema.columns:
        if col.kind in ("label", "ignore") or col.name not in frame.columns:
            continue
        s = frame[col.name]
        if col.kind in ("numeric", "port"):
            blocks.append(s.to_numpy(dtype=np.float64)[:, None])
            names.append(col.name)
        elif col.kind == "ip_address":
            blocks.append(np.array([ip_to_int(v) for v in s], dtype=np.float64)[:, None])
            names.append(col.name)
        else:
            vocab = vocabularies[col.name]
            pos = {v: i for i, v in enumerate(vocab)}
            block = np.zeros((len(s), len(vocab)))
            codes = s.map(lambda v: pos.get(v, -1)).to_numpy(dtype=np.int64)
            hit = codes >= 0
            block[np.flatnonzero(hit), codes[hit]] = 1.0
            blocks.append(block)
            names.extend(f"{col.name}={v}" for v in vocab)
    matrix = np.hstack(blocks) if blocks else np.zeros((len(frame), 0))
    return matrix, names


def encode(table, schema=None, fitted=None):
    """One-hot, IP conversion and min-max scaling into an :class:`EncodedDataset`.

    With ``fitted=None`` the vocabularies and min/max are learned from this
    table. Otherwise they are applied as given: unseen categories encode as
    all-zero and out-of-range values are clipped into [0, 1].
    """
    schema = schema or table.schema
    frame = table.frame
    label_col = schema.label_column
    lookup = {n: i for i, n in enumerate(schema.label_names)}
    unknown = sorted({str(v) for v in frame[label_col] if v not in lookup})
    if unknown:
        raise LabelError(f"labels not in {list(schema.label_names)}: {unknown[:5]}")
    labels = frame[label_col].map(lookup).to_numpy(dtype=np.int64)

    if fitted is None:
        vocabularies = {c: sorted({str(v) for v in frame[c]}) for c in schema.names("categorical")
                        if c in frame.columns}
        raw, names = _raw_features(frame, schema, vocabularies)
        mins, maxs = raw.min(axis=0), raw.max(axis=0)
        fitted = Normalizer(vocabularies, names, mins, maxs)
    else:
        raw, names = _raw_features(frame, schema, fitted.vocabularies)
        if names != fitted.feature_names:
            raise SchemaError("table columns do not match the fitted normalizer's features")
    span = fitted.maxs - fitted.mins
    safe = np.where(span > 0, span, 1.0)
    matrix = np.where(span > 0, (raw - fitted.mins) / safe, 0.0)
    matrix = np.clip(matrix, 0.0, 1.0)
    return EncodedDataset(matrix, labels, tuple(schema.label_names), list(fitted.feature_names), fitted)


# --------------------------------------------------------------------------
# splitting
# --------------------------------------------------------------------------

def split_indices(labels, fraction=0.8, seed=0):
    """Stratified train/test index split.

    Every class with at least two members lands in both parts; a singleton
    class goes to train. Per-class train counts are ``round(fraction * n)``
    clamped to ``[1, n - 1]``.
    """
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        n = len(idx)
        k = n if n == 1 else min(max(int(np.floor(fraction * n + 0.5)), 1), n - 1)
        train.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(test))


def split(dataset, fraction=0.8, seed=0):
    tr, te = split_indices(dataset.labels, fraction, seed)
    return dataset.subset(tr), dataset.subset(te)


def prepare(table, fraction=0.8, seed=0):
    """Split a cleaned table, fit the encoding on train, apply it to test."""
    label_col = table.schema.label_column
    lookup = {n: i for i, n in enumerate(table.schema.label_names)}
    y = table.frame[label_col].map(lookup).to_numpy()
    tr, te = split_indices(y, fraction, seed)
    train_tab = RawTable(table.frame.iloc[tr].reset_index(drop=True), table.schema)
    test_tab = RawTable(table.frame.iloc[te].reset_index(drop=True), table.schema)
    train = encode(train_tab)
    test = encode(test_tab, fitted=train.normalizer)
    return train, test


# --------------------------------------------------------------------------
# synthetic profile
# --------------------------------------------------------------------------

def synthetic_frame(n_samples=600, n_features=8, n_classes=3, separation=8.0, seed=0):
    """Gaussian blobs, unit variance, class centres ``separation`` apart along axes.

    Classes are balanced (up to one sample). Larger ``separation`` gives
    cleaner margins; at the default the classes are separable in practice.
    """
    if n_features < n_classes:
        raise ValueError("synthetic profile needs n_features >= n_classes")
    rng = np.random.default_rng(seed)
    y = np.arange(n_samples) % n_classes
    y = y[rng.permutation(n_samples)]
    centres = np.zeros((n_classes, n_features))
    centres[np.arange(n_classes), np.arange(n_classes)] = separation
    x = centres[y] + rng.normal(size=(n_samples, n_features))
    frame = pd.DataFrame({f"f{i}": x[:, i] for i in range(n_features)})
    frame["label"] = [f"class{c}" for c in y]
    return frame


def synthetic_table(n_samples=600, n_features=8, n_classes=3, separation=8.0, seed=0):
    schema = synthetic_schema(n_features, n_classes)
    frame = synthetic_frame(n_samples, n_features, n_classes, separation, seed)
    cols = {c: frame[c].astype(np.float64) for c in frame.columns if c != "label"}
    cols["label"] = frame["label"].astype(object)
    return RawTable(pd.DataFrame(cols), schema)


# --------------------------------------------------------------------------
# artifact
# --------------------------------------------------------------------------

def save_dataset(path, train, test, report=None, extra=None):
    meta = {
        "artifact": "dataset",
        "label_names": list(train.label_names),
        "normalizer": train.normalizer.to_meta(),
        "report": report.to_dict() if report is not None else None,
        "extra": extra or {},
    }
    arrays = {
        "train.matrix": train.matrix, "train.labels": train.labels,
        "test.matrix": test.matrix, "test.labels": test.labels,
        "normalizer.min": train.normalizer.mins, "normalizer.max": train.normalizer.maxs,
    }
    container.write(path, meta, arrays)


def load_dataset(path):
    """Returns ``(train, test, meta)``."""
    meta, arrays = container.read(path)
    if meta.get("artifact") != "dataset":
        raise IngestError(f"{path} holds a {meta.get('artifact')!r} artifact, not a dataset")
    norm = Normalizer.from_meta(meta["normalizer"], arrays["normalizer.min"], arrays["normalizer.max"])
    names = tuple(meta["label_names"])
    parts = []
    for part in ("train", "test"):
        parts.append(EncodedDataset(arrays[f"{part}.matrix"], arrays[f"{part}.labels"], names,
                                    list(norm.feature_names), norm))
    return parts[0], parts[1], meta
