import os
import datajoint as dj

if "custom" not in dj.config:
    dj.config["custom"] = {}

# overwrite dj.config['custom'] values with environment variables if available

dj.config["custom"]["database.prefix"] = os.getenv(
    "DATABASE_PREFIX", dj.config["custom"].get("database.prefix", "")
)

dj.config["custom"]["fogran.field_prime"] = int(
    os.getenv("FOGRAN_FIELD_PRIME", dj.config["custom"].get("fogran.field_prime", 65537))
)

dj.config["custom"]["fogran.seed"] = int(
    os.getenv("FOGRAN_SEED", dj.config["custom"].get("fogran.seed", 20171029))
)

dj.config["custom"]["fogran.sweep_workers"] = int(
    os.getenv(
        "FOGRAN_SWEEP_WORKERS", dj.config["custom"].get("fogran.sweep_workers", 1)
    )
)

db_prefix = dj.config["custom"].get("database.prefix", "")
