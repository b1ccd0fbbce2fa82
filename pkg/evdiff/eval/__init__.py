from evdiff.eval.metrics import MetricReport, evaluate, mse, ssim
