from evdiff.diffusion.schedule import (
    NoiseSchedule,
    alpha_weight,
    c_noise,
    c_skip,
    lambda_weight,
    make_schedule,
)
from evdiff.diffusion.denoisers import (
    ConditionalDenoiser,
    ConstantDenoiser,
    Denoiser,
    GaussianPosteriorDenoiser,
    Latent,
    ZeroDenoiser,
    forward_noise,
    posterior_mean_gaussian,
)
from evdiff.diffusion.training import TrainConfig, denoising_loss, train_denoiser, zero_events
from evdiff.diffusion.model_io import load_model, save_model
