"""
Cache-size / fronthaul regime sweeps comparing the proposed scheme with full caching
"""
import datajoint as dj
import pandas as pd
from element_interface.utils import dict_to_uuid

from .core import analysis
from .core.utils import convert_to_fraction, get_config

schema = dj.schema()

logger = dj.logger


def activate(schema_name, *, create_schema=True, create_tables=True):
    """Activate the current schema.

    Args:
        schema_name (str): schema name on the database server to activate the `regime` schema.
        create_schema (bool, optional): If True (default), create schema in the database if it does not yet exist.
        create_tables (bool, optional): If True (default), create tables in the database if they do not yet exist.
    """
    schema.activate(
        schema_name, create_schema=create_schema, create_tables=create_tables
    )


@schema
class RegimeParamSet(dj.Lookup):
    """Grids of fractional cache sizes and fronthaul pre-logs.

    Attributes:
        paramset_idx (smallint): Unique parameter set ID.
        d (tinyint unsigned): Connectivity degree.
        mu_grid (varchar(64)): Cache-size grid as a:b:step.
        r_grid (varchar(64)): Fronthaul grid as a:b:step.
        k=null (smallint unsigned): Optional K for the K-dependent edge NDT.
        paramset_desc (varchar(128)): Description of the parameter set.
        param_set_hash (uuid): Hash of the grids, d and k.
    """

    definition = """
    paramset_idx        : smallint
    ---
    d                   : tinyint unsigned
    mu_grid             : varchar(64)
    r_grid              : varchar(64)
    k=null              : smallint unsigned
    paramset_desc=''    : varchar(128)
    param_set_hash      : uuid
    unique index (param_set_hash)
    """

    @classmethod
    def insert_new_params(
        cls,
        d: int,
        mu_grid: str,
        r_grid: str,
        k: int = None,
        paramset_desc: str = "",
        paramset_idx: int = None,
    ):
        """Inserts new grids into the RegimeParamSet table.

        Args:
            d (int): connectivity degree.
            mu_grid (str): cache-size grid `a:b:step`.
            r_grid (str): fronthaul grid `a:b:step`.
            k (int, optional): use the K-dependent edge NDT.
            paramset_desc (str, optional): description of the parameter set.
            paramset_idx (int, optional): Unique parameter set ID. Defaults to None.
        """
        # parse now so malformed grids never reach the table
        analysis.parse_grid(mu_grid)
        analysis.parse_grid(r_grid)

        if paramset_idx is None:
            paramset_idx = (
                dj.U().aggr(cls, n="max(paramset_idx)").fetch1("n") or 0
            ) + 1

        param_dict = {
            "paramset_idx": paramset_idx,
            "d": d,
            "mu_grid": mu_grid,
            "r_grid": r_grid,
            "k": k,
            "paramset_desc": paramset_desc,
            "param_set_hash": dict_to_uuid(
                {"d": d, "mu_grid": mu_grid, "r_grid": r_grid, "k": k}
            ),
        }
        param_query = cls & {"param_set_hash": param_dict["param_set_hash"]}

        if param_query:
            existing_paramset_idx = param_query.fetch1("paramset_idx")
            if existing_paramset_idx == paramset_idx:
                return
            raise dj.DataJointError(
                f"The specified param-set already exists"
                f" - with paramset_idx: {existing_paramset_idx}"
            )
        if {"paramset_idx": paramset_idx} in cls.proj():
            raise dj.DataJointError(
                f"The specified paramset_idx {paramset_idx} already exists,"
                f" please pick a different one."
            )
        cls.insert1(param_dict)


@schema
class RegimeSweep(dj.Computed):
    """Best scheme over a (mu, r) grid.

    Attributes:
        RegimeParamSet (foreign key): RegimeParamSet primary key.
        point_count (int unsigned): Grid points evaluated.
        proposed_count (int unsigned): Points where the proposed scheme is strictly better.
    """

    definition = """
    -> RegimeParamSet
    ---
    point_count         : int unsigned
    proposed_count      : int unsigned
    """

    class Point(dj.Part):
        """NDTs of both schemes at one grid point.

        Attributes:
            RegimeSweep (foreign key): RegimeSweep primary key.
            mu (varchar(32)): Fractional cache size as num/den.
            r (varchar(32)): Fronthaul pre-log as num/den.
            delta_ach (varchar(32)): Proposed end-to-end NDT.
            delta_full (varchar(32)): Full-caching end-to-end NDT.
            best (enum): Better scheme, or Tie.
        """

        definition = """
        -> master
        mu              : varchar(32)
        r               : varchar(32)
        ---
        delta_ach       : varchar(32)
        delta_full      : varchar(32)
        best            : enum('Proposed', 'FullCachingBenchmark', 'Tie')
        """

    def make(self, key):
        d, mu_grid, r_grid, k = (RegimeParamSet & key).fetch1(
            "d", "mu_grid", "r_grid", "k"
        )
        frame = analysis.sweep(
            int(d),
            analysis.parse_grid(mu_grid),
            analysis.parse_grid(r_grid),
            k=None if pd.isna(k) else int(k),
            workers=get_config("fogran.sweep_workers"),
        )
        self.insert1(
            {
                **key,
                "point_count": len(frame),
                "proposed_count": int((frame.best == analysis.Scheme.PROPOSED.value).sum()),
            }
        )
        self.Point.insert(
            [
                {**key, **row}
                for row in frame.drop(columns="d").to_dict(orient="records")
            ]
        )
        logger.info(f"Regime sweep {key['paramset_idx']}: {len(frame)} points")

    @staticmethod
    def points(key) -> list:
        """Stored points as exact (mu, r, delta_ach, delta_full, best) tuples."""
        rows = (RegimeSweep.Point & key).fetch(
            "mu", "r", "delta_ach", "delta_full", "best", as_dict=True
        )
        return [
            (
                convert_to_fraction(row["mu"]),
                convert_to_fraction(row["r"]),
                convert_to_fraction(row["delta_ach"]),
                convert_to_fraction(row["delta_full"]),
                analysis.Scheme(row["best"]),
            )
            for row in rows
        ]
