from evdiff.sampler.decoder import Decoder, decode
from evdiff.sampler.sampling import SamplerConfig, SamplerHook, StepContext, reverse_step, sample
