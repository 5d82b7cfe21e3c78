"""Trajectory losses, local optimizers and basin hopping for model fitting."""
from hybridsim.estimation.basin import BasinHoppingConfig, BasinHoppingResult, basin_hopping, parallel_basin_hop
from hybridsim.estimation.data import DatasetError, Trajectory, TrajectoryDataset
from hybridsim.estimation.loss import LossError, TrajectoryLoss, rollout_loss
from hybridsim.estimation.optimize import LocalResult, OptimizerError, local_minimize, minimize_local
from hybridsim.estimation.parameters import BindingError, ParameterBlock, SimulationSetup, nn_names

__all__ = [
    "BasinHoppingConfig", "BasinHoppingResult", "BindingError", "DatasetError", "LocalResult",
    "LossError", "OptimizerError", "ParameterBlock", "SimulationSetup", "Trajectory",
    "TrajectoryDataset", "TrajectoryLoss", "basin_hopping", "local_minimize", "minimize_local",
    "nn_names", "parallel_basin_hop", "rollout_loss",
]
