from evdiff.guidance.residual import descent_strength, guide, residual_grad, residual_loss
from evdiff.guidance.schedule import GuidanceSchedule, schedule_strength
from evdiff.guidance.predictor import ResidualPredictor
from evdiff.guidance.hook import GuidanceHook
