from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np

from ...config import Config, load_config, read_json, validate_json
from ...objectives import (AdversarialScores, DamsmInputs, damsm, damsm_from_features, discriminator_loss,
                           generator_loss, mean_adversarial)
from ...serializers import LossesSerializer, ObjectiveSerializer
from ...tensorio import read_tensor
from ..base import AttrContrastCommand


DAMSM_FILES = ('features', 'sentence')


def damsm_term(block: Dict[str, Any], gamma: float) -> Tuple[np.ndarray, float]:
    '''Posteriors and loss of a damsm block, scored from feature files when it has no r_scores.'''
    if 'r_scores' in block:
        return damsm(DamsmInputs(block['r_scores'], block['matched_index']), gamma)
    return damsm_from_features(read_tensor(block['features']), read_tensor(block['sentence']),
                               block['matched_index'], gamma)


class Command(AttrContrastCommand):
    help = 'Generator and discriminator objectives from component losses, weights and adversarial scores.'
    config_serializer_class = ObjectiveSerializer
    config_required = True

    def add_arguments(self, parser) -> None:
        super().add_arguments(parser)
        parser.add_argument('--losses', help='output of the losses subcommand; supplies l_diff and l_per')

    def input_paths(self, options: Dict[str, Any]) -> List[Path]:
        losses = [Path(options['losses'])] if options['losses'] else []
        block = load_config(options['config'], self.config_serializer_class).get('damsm', {})
        return super().input_paths(options) + losses + [Path(block[key]) for key in DAMSM_FILES if key in block]

    def run(self, config: Config, fields: Dict[str, Any], /, **options: Any) -> Dict[str, Any]:
        losses = {}
        if options['losses']:
            losses = validate_json(read_json(options['losses']), LossesSerializer, options['losses'])
        # Values written in the config take precedence over the --losses file.
        l_diff = fields.get('l_diff', losses.get('l_diff', 0.0))
        l_per = fields.get('l_per', losses.get('l_per', 0.0))
        l_attr = fields.get('l_attr', 0.0)
        w = config.loss_weights

        output: Dict[str, Any] = {}
        if 'damsm' in fields:
            probabilities, l_damsm = damsm_term(fields['damsm'], config.gamma)
            output['damsm_probabilities'] = probabilities.tolist()
        else:
            l_damsm = fields.get('l_damsm', 0.0)

        scores = [AdversarialScores(**dict(item)) for item in fields['adversarial']]
        adversarial_g, adversarial_d = mean_adversarial(scores)
        output.update({
            'l_g': generator_loss(scores, l_diff, l_per, l_damsm, w),
            'l_d': discriminator_loss(scores, l_attr, w),
            'terms': {
                'adversarial_g': adversarial_g,
                'adversarial_d': adversarial_d,
                'l_diff': w.lambda1 * l_diff,
                'l_per': w.lambda2 * l_per,
                'l_damsm': w.lambda3 * l_damsm,
                'l_attr': w.lambda4 * l_attr,
            },
        })
        return output
