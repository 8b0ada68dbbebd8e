from element_fogran import db_prefix, delivery, regime

# Activate schemas
delivery.activate(db_prefix + "delivery")
regime.activate(db_prefix + "regime")


def populate_examples():
    """Schedules and measurements for the bundled networks, plus one regime sweep."""
    for k in set(delivery.Network.fetch("k")):
        delivery.DemandPattern.insert_canonical(int(k))

    delivery.DeliverySchedule.populate(display_progress=True)
    delivery.DeliveryMeasurement.populate(display_progress=True)

    regime.RegimeParamSet.insert_new_params(
        d=4,
        mu_grid="0:1/2:1/16",
        r_grid="1/20:1/2:1/20",
        paramset_desc="d=4 regime map",
        paramset_idx=1,
    )
    regime.RegimeSweep.populate(display_progress=True)
