from evdiff.zeroshot.modulation import (
    ReferenceSet,
    WeightSchedule,
    build_reference_sets,
    deviations,
    modulate,
    modulate_interp,
    modulate_predict,
    vfi_layout,
    weight,
)
from evdiff.zeroshot.hook import ZeroShotHook
