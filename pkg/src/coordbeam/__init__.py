"""Location-aided coordinated analog beam selection for uplink multi-user mmWave."""
from .beamgain import gain_matrix_analytic, gain_matrix_empirical, l_function
from .channel import ChannelRealization, draw_channel, steering_vector
from .codebook import Codebook, build_codebook
from .linkeval import (RateRecord, effective_channel, evaluate_sinr, reconstruct_signal,
                       zf_combiner)
from .scenario import (BeliefSet, DegenerateGeometry, ErrorModel, PositionMatrix,
                       ScenarioConfig, angles_from_positions, build_beliefs,
                       sample_posterior, sample_position_error, sample_prior,
                       sample_scenario)
from .selection import (BeamPair, SelectionContext, Strategy, greedy_sum_rate_eval,
                        predict_chain, select, select_all, select_coordinated,
                        select_uncoordinated, single_user_rate)
from .simrunner import ExperimentConfig, ResultRecord, preset, run_experiment, run_trial

__version__ = "0.1.0"

__all__ = [
    "gain_matrix_analytic", "gain_matrix_empirical", "l_function",
    "ChannelRealization", "draw_channel", "steering_vector",
    "Codebook", "build_codebook",
    "RateRecord", "effective_channel", "evaluate_sinr", "reconstruct_signal", "zf_combiner",
    "BeliefSet", "DegenerateGeometry", "ErrorModel", "PositionMatrix", "ScenarioConfig",
    "angles_from_positions", "build_beliefs", "sample_posterior", "sample_position_error",
    "sample_prior", "sample_scenario",
    "BeamPair", "SelectionContext", "Strategy", "greedy_sum_rate_eval", "predict_chain",
    "select", "select_all", "select_coordinated", "select_uncoordinated", "single_user_rate",
    "ExperimentConfig", "ResultRecord", "preset", "run_experiment", "run_trial",
]
