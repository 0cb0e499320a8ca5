from pathlib import Path
from typing import Optional

from rest_framework import serializers

from .combiner import MAX_SEED
from .features import EXTRACTOR_KINDS
from .objectives import LOSS_WEIGHT_PRESETS


def resolve_path(value: str, base_dir: Optional[Path]) -> Path:
    '''A path from a config file, relative ones taken against the file's directory.'''
    return Path(value) if base_dir is None else Path(base_dir) / value


class ExtractorSerializer(serializers.Serializer):
    kind = serializers.ChoiceField(choices=EXTRACTOR_KINDS, required=False)
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED, required=False)
    out_dim = serializers.IntegerField(min_value=1, required=False)


class LossWeightsSerializer(serializers.Serializer):
    '''A named preset, explicit lambdas, or a preset with some lambdas overridden.'''

    preset = serializers.ChoiceField(choices=list(LOSS_WEIGHT_PRESETS), required=False)
    lambda1 = serializers.FloatField(min_value=0, required=False)
    lambda2 = serializers.FloatField(min_value=0, required=False)
    lambda3 = serializers.FloatField(min_value=0, required=False)
    lambda4 = serializers.FloatField(min_value=0, required=False)


class ConfigSerializer(serializers.Serializer):
    '''Fields of a ``--config`` file; anything left out falls back to settings.ATTRCONTRAST.'''

    embedding_dim = serializers.IntegerField(min_value=1, required=False)
    extractor = ExtractorSerializer(required=False)
    loss_weights = LossWeightsSerializer(required=False)
    gamma = serializers.FloatField(min_value=0, required=False)
    seed = serializers.IntegerField(min_value=0, max_value=MAX_SEED, required=False)
    nce_standard = serializers.BooleanField(required=False)
    lexicon = serializers.CharField(required=False)

    def validate_lexicon(self, value: str) -> str:
        path = resolve_path(value, self.context.get('base_dir'))
        if not path.is_file():
            raise serializers.ValidationError(f'lexicon `{value}` does not exist')
        return str(path)


class AdversarialScoresSerializer(serializers.Serializer):
    d_fake_uncond = serializers.FloatField(min_value=0, max_value=1)
    d_fake_cond = serializers.FloatField(min_value=0, max_value=1)
    d_real_uncond = serializers.FloatField(min_value=0, max_value=1, default=1.0)
    d_real_cond = serializers.FloatField(min_value=0, max_value=1, default=1.0)


class DamsmSerializer(serializers.Serializer):
    '''Matching scores as ``r_scores``, or ``features`` (M, d) and ``sentence`` (d) tensor files to score.'''

    r_scores = serializers.ListField(child=serializers.FloatField(), min_length=1, required=False)
    features = serializers.CharField(required=False)
    sentence = serializers.CharField(required=False)
    matched_index = serializers.IntegerField(min_value=0, default=0)

    def validate(self, data):
        files = [key for key in ('features', 'sentence') if key in data]
        if ('r_scores' in data) == bool(files) or len(files) == 1:
            raise serializers.ValidationError('give either `r_scores` or both `features` and `sentence`')
        if 'r_scores' in data and data['matched_index'] >= len(data['r_scores']):
            raise serializers.ValidationError({'matched_index': f'must be below {len(data["r_scores"])}'})
        for key in files:
            data[key] = str(resolve_path(data[key], self.context.get('base_dir')))
        return data


class ObjectiveSerializer(ConfigSerializer):
    '''Component losses and adversarial scores of one objective evaluation.

    ``adversarial`` is one score object or a list of them (averaged). The
    DAMSM term is given directly as ``l_damsm`` or computed from a ``damsm``
    block of matching scores or of candidate and sentence feature files.
    '''

    adversarial = serializers.ListField(child=AdversarialScoresSerializer(), min_length=1)
    l_diff = serializers.FloatField(required=False)
    l_per = serializers.FloatField(min_value=0, required=False)
    l_damsm = serializers.FloatField(min_value=0, required=False)
    damsm = DamsmSerializer(required=False)
    l_attr = serializers.FloatField(min_value=0, required=False)

    def to_internal_value(self, data):
        if isinstance(data, dict) and isinstance(data.get('adversarial'), dict):
            data = {**data, 'adversarial': [data['adversarial']]}
        return super().to_internal_value(data)

    def validate(self, data):
        if 'l_damsm' in data and 'damsm' in data:
            raise serializers.ValidationError('give either `l_damsm` or a `damsm` block, not both')
        return data


class LpipsLayerEntrySerializer(serializers.Serializer):
    v = serializers.CharField()
    v_hat = serializers.CharField()
    omega = serializers.CharField()


class LpipsManifestSerializer(serializers.Serializer):
    '''Per-layer tensor file names, resolved against the manifest's directory.'''

    layers = serializers.ListField(child=LpipsLayerEntrySerializer(), min_length=1)


class RunReportSerializer(serializers.Serializer):
    subcommand = serializers.CharField()
    inputs_digest = serializers.CharField()
    outputs = serializers.JSONField()
    wall_time = serializers.FloatField()


class SplitSerializer(serializers.Serializer):
    '''A combine result: {"c1": [...], "c2": [...]} of 1-based attribute indices.'''

    c1 = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1)
    c2 = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1)


class ParsedSentenceSerializer(serializers.Serializer):
    '''One line of parse output.'''

    attributes = serializers.ListField(child=serializers.CharField())
    split = SplitSerializer(required=False, allow_null=True)


class LossesSerializer(serializers.Serializer):
    '''Output of the losses subcommand, fed to objective with --losses.'''

    l_diff = serializers.FloatField()
    l_per = serializers.FloatField(min_value=0)
