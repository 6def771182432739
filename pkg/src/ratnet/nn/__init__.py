from ratnet.nn.activations import ActivationKind, ActivationSpec
from ratnet.nn.model import DenseRationalNet, backward, forward, loss_mse
from ratnet.nn.training import TrainConfig, TrainingHistory, train

__all__ = [
    'ActivationKind',
    'ActivationSpec',
    'DenseRationalNet',
    'TrainConfig',
    'TrainingHistory',
    'backward',
    'forward',
    'loss_mse',
    'train',
]
