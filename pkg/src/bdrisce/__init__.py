"""Power-measurement channel estimation for beyond-diagonal RIS."""

from .bdris import (BdRisConfig, NumericalError, ReactanceMatrix, ScatteringMatrix,
                    TrpVector, ValidationReport, assemble_reflection, cayley_transform,
                    random_reactance, reflection_from_reactance, validate_scattering,
                    vectorize_trp)
from .channel import (AutocorrelationMatrix, CascadedChannel, ChannelRealization,
                      PowerMeasurement, SceneGeometry, cascade, dbm_to_watts,
                      draw_channels, end_to_end_channel, measure_power, path_loss_db,
                      true_autocorrelation, upa_steering, watts_to_dbm)
from .estimator import (RealChannelMatrix, RealInput, TrainConfig, TrainResult,
                        WeightMatrix, embed, forward, gradient, loss, lr_schedule,
                        recover_autocorrelation, structured_weights, train)
from .harness import (ResultRow, RunConfig, aggregate, apply_axis_value, emit_results,
                      nmse, read_results, run_trial, sweep)
from .kernels import backend
from .selection import (CandidatePool, TrpSet, build_pool, correlation, greedy_select,
                        max_pairwise_correlation, random_select)

__version__ = "0.1.0"
