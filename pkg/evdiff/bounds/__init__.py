from evdiff.bounds.linalg import lipschitz_and_condition, power_iteration
from evdiff.bounds.check import (
    BoundInstance,
    BoundReport,
    check_bound,
    random_instance,
    run_bound_check,
)
