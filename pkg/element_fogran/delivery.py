"""
Persisted delivery experiments over (K, d) regular networks
"""
import datajoint as dj
from element_interface.utils import dict_to_uuid

from .core import analysis, placement, scheduler, validator
from .core.topology import new_topology
from .core.utils import format_fraction

schema = dj.schema()

logger = dj.logger


def activate(
    schema_name: str,
    *,
    create_schema: bool = True,
    create_tables: bool = True,
):
    """Activates the `delivery` schema.

    Args:
        schema_name (str): schema name on the database server to activate the `delivery` schema.
        create_schema (bool): If True, schema will be created in the database.
        create_tables (bool): If True, tables related to the schema will be created in the database.
    """
    schema.activate(
        schema_name, create_schema=create_schema, create_tables=create_tables
    )


@schema
class Network(dj.Lookup):
    """(K, d) regular partially connected edge networks.

    Attributes:
        k (smallint unsigned): Number of EN/user pairs.
        d (tinyint unsigned): Connectivity degree.
        network_description (varchar(255)): Optional description.
    """

    definition = """
    k                        : smallint unsigned
    d                        : tinyint unsigned
    ---
    network_description=''   : varchar(255)
    """

    contents = [
        (8, 2, "smallest example with a Phase 2"),
        (9, 2, "K divisible by d+1"),
        (11, 4, "worked example with two stages"),
    ]

    @classmethod
    def insert_network(cls, k: int, d: int, description: str = ""):
        """Validate and insert one network; existing rows are skipped."""
        t = new_topology(k, d)
        cls.insert1(
            {"k": t.k, "d": t.d, "network_description": description},
            skip_duplicates=True,
        )


@schema
class DemandPattern(dj.Lookup):
    """Demand vectors, one file id per user.

    Attributes:
        demand_pattern (varchar(32)): Name of the demand pattern.
        n_files (smallint unsigned): Library size N.
        n_users (smallint unsigned): Length K of the demand vector.
        demands (longblob): File id requested by each user.
    """

    definition = """
    demand_pattern      : varchar(32)
    n_files             : smallint unsigned
    ---
    n_users             : smallint unsigned
    demands             : longblob
    """

    @classmethod
    def insert_canonical(cls, k: int, n_files: int = None):
        """Insert the canonical demands ((j-1) mod N) + 1 for K users."""
        n_files = n_files or k
        demands = placement.canonical_demands(k, n_files)
        cls.insert1(
            {
                "demand_pattern": f"canonical-{k}",
                "n_files": n_files,
                "n_users": k,
                "demands": list(demands),
            },
            skip_duplicates=True,
        )


@schema
class DeliverySchedule(dj.Computed):
    """Blind interference-avoidance schedule of a network for one demand pattern.

    Attributes:
        Network (foreign key): Network primary key.
        DemandPattern (foreign key): DemandPattern primary key.
        slot_count (int unsigned): Slots in the schedule.
        delivery_count (int unsigned): Coded-subfile transmissions.
        schedule_hash (uuid): Hash of the demand-free transmission pattern.
    """

    definition = """
    -> Network
    -> DemandPattern
    ---
    slot_count          : int unsigned
    delivery_count      : int unsigned
    schedule_hash       : uuid
    """

    class Transmission(dj.Part):
        """One coded-subfile transmission.

        Attributes:
            DeliverySchedule (foreign key): DeliverySchedule primary key.
            slot (int unsigned): Slot time, 1-based.
            en (smallint unsigned): Transmitting EN.
            stage (tinyint unsigned): Stage of the slot.
            phase (tinyint unsigned): 1 or 2.
            ue (smallint unsigned): Intended user.
            file (smallint unsigned): Demanded file id.
            subfile_type (tinyint unsigned): Coded subfile type.
        """

        definition = """
        -> master
        slot            : int unsigned
        en              : smallint unsigned
        ---
        stage           : tinyint unsigned
        phase           : tinyint unsigned
        ue              : smallint unsigned
        file            : smallint unsigned
        subfile_type    : tinyint unsigned
        """

    @property
    def key_source(self):
        return (Network * DemandPattern) & "n_users = k" & "d = 1 OR k > d"

    def make(self, key):
        t = new_topology(key["k"], key["d"])
        demands = placement.DemandVector((DemandPattern & key).fetch1("demands"))
        demands.validate(t.k, key["n_files"])

        sched = scheduler.build_schedule(t, demands)
        frame = scheduler.schedule_frame(sched)
        pattern = {
            str(n): [row.slot, row.en, row.ue, row.type]
            for n, row in enumerate(frame.itertuples())
        }

        self.insert1(
            {
                **key,
                "slot_count": len(sched),
                "delivery_count": sched.deliveries,
                "schedule_hash": dict_to_uuid({**pattern, "k": t.k, "d": t.d}),
            }
        )
        self.Transmission.insert(
            [
                {
                    **key,
                    "slot": row.slot,
                    "en": row.en,
                    "stage": row.stage,
                    "phase": row.phase,
                    "ue": row.ue,
                    "file": row.file,
                    "subfile_type": row.type,
                }
                for row in frame.itertuples()
            ]
        )
        logger.info(f"{t}: stored {len(sched)} slots for {key['demand_pattern']}")

    def fetch_schedule(self, key) -> scheduler.Schedule:
        """Rebuild the stored schedule (without payloads)."""
        t = new_topology(*(Network & key).fetch1("k", "d"))
        frame = (self.Transmission & key).fetch(format="frame").reset_index()
        frame = frame.rename(columns={"subfile_type": "type"})
        return scheduler.schedule_from_frame(t, frame[scheduler.DUMP_COLUMNS])


@schema
class DeliveryMeasurement(dj.Computed):
    """Validation and slot-counting NDT of a stored schedule.

    Attributes:
        DeliverySchedule (foreign key): DeliverySchedule primary key.
        ndt (varchar(32)): Exact edge NDT as num/den.
        sum_dof (varchar(32)): Deliveries per slot as num/den.
        ndt_bound (varchar(32)): Worst-case edge NDT for d as num/den.
        collision_free (bool): No decoding collision in any slot.
        complete (bool): Every user received all d subfile types.
    """

    definition = """
    -> DeliverySchedule
    ---
    ndt                 : varchar(32)
    sum_dof             : varchar(32)
    ndt_bound           : varchar(32)
    collision_free      : bool
    complete            : bool
    """

    def make(self, key):
        sched = DeliverySchedule().fetch_schedule(key)
        t = sched.topology
        result = validator.validate(t, sched)
        report = validator.measure(t, sched)
        if not result.ok:
            logger.warning(f"{t}: schedule for {key['demand_pattern']} failed validation")

        self.insert1(
            {
                **key,
                "ndt": format_fraction(report.ndt_exact),
                "sum_dof": format_fraction(report.sum_dof),
                "ndt_bound": format_fraction(analysis.prop1_bound(t.d)),
                "collision_free": not result.collisions,
                "complete": not result.missing and not result.collisions,
            }
        )
