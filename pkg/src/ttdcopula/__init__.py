"""Arterial path travel-time distributions from GMM marginals and copulas."""
from .copulas import (CopulaModel, FitResult, copula_cdf, copula_density, copula_logpdf,
                      copula_sample, fit_copula)
from .dependence import (PseudoObservations, kendall_tau, param_to_tau, tau_to_param,
                         to_pseudo_obs)
from .gof import GofReport, cvm_statistic, gof_report, ks_statistic
from .marginals import GmmFit, GmmParams, fit_gmm, gmm_cdf, gmm_pdf, gmm_quantile, gmm_sample
from .paths import (PathTtdEstimate, empirical_path, estimate_cdf, estimate_convolution_path,
                    estimate_copula_path)
from .tripdata import (SegmentSeries, SynthSpec, TripRecord, assemble_series, load_trips,
                       synthesize, write_trips)

__version__ = "0.1.0"
