import json
import math
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.test import SimpleTestCase

from ..cli import USAGE, run_cli
from ..errors import ErrorReason
from ..management.base import AttrCommandError
from ..tensorio import write_tensor


FIXTURES = settings.BASE_DIR / 'attrcontrast' / 'fixtures'


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = Path(self.directory.name)

    def tearDown(self):
        self.directory.cleanup()

    def run_cli(self, *argv: str):
        stdout, stderr = StringIO(), StringIO()
        code = run_cli(list(argv), stdout, stderr)
        return code, stdout.getvalue(), stderr.getvalue()

    def run_ok(self, *argv: str):
        code, out, err = self.run_cli(*argv)
        self.assertEqual(code, 0, err)
        return json.loads(out)

    def error_of(self, err: str) -> dict:
        return json.loads(err.strip().splitlines()[-1])['errors'][0]

    def write_json(self, name: str, data) -> Path:
        path = self.root / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path


class ParseCommandTestCase(CommandTestCase):
    def test_sentences(self):
        code, out, _ = self.run_cli('parse', '--in', str(FIXTURES / 'sentences.txt'))
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(len(lines), 4)
        self.assertEqual(lines[1], '{"attributes":["bird black","white belly","orange bill"]}')
        self.assertEqual(json.loads(lines[3]), {'attributes': []})

    def test_splits(self):
        code, out, _ = self.run_cli('parse', '--in', str(FIXTURES / 'sentences.txt'), '--split', '--seed', '3')
        self.assertEqual(code, 0)
        lines = [json.loads(line) for line in out.splitlines()]
        for line in lines[:3]:
            split = line['split']
            self.assertEqual(sorted(split['c1'] + split['c2']), list(range(1, len(line['attributes']) + 1)))
        self.assertIsNone(lines[3]['split'])

    def test_pretagged(self):
        path = self.root / 'tagged.txt'
        path.write_text('grey_JJ head_NN and_CC wings_NNS\n', encoding='utf-8')
        code, out, _ = self.run_cli('parse', '--in', str(path), '--pretagged')
        self.assertEqual((code, out), (0, '{"attributes":["grey head wings"]}\n'))

    def test_split_needs_seed(self):
        code, _, err = self.run_cli('parse', '--in', str(FIXTURES / 'sentences.txt'), '--split')
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid arguments')

    def test_missing_input(self):
        code, _, err = self.run_cli('parse', '--in', str(self.root / 'absent.txt'))
        self.assertEqual(code, 2)
        self.assertEqual(self.error_of(err)['code'], str(ErrorReason.MISSING_FILE.value))

    def test_non_utf8_files(self):
        bad = self.root / 'bad.txt'
        bad.write_bytes(b'red\xff crown\n')
        for argv in (('--in', str(bad)), ('--in', str(FIXTURES / 'sentences.txt'), '--lexicon', str(bad))):
            code, _, err = self.run_cli('parse', *argv)
            self.assertEqual(code, 2, argv)
            error = self.error_of(err)
            self.assertEqual(error['title'], 'malformed file')
            self.assertIn('not UTF-8', error['detail'])


class CombineCommandTestCase(CommandTestCase):
    def test_forced_split(self):
        code, out, _ = self.run_cli('combine', '--m', '2', '--seed', '42')
        self.assertEqual((code, out), (0, '{"c1":[1],"c2":[2]}\n'))

    def test_golden_split(self):
        code, out, _ = self.run_cli('combine', '--m', '4', '--seed', '42')
        self.assertEqual((code, out), (0, '{"c1":[3,4],"c2":[1,2]}\n'))

    def test_repeatable(self):
        first = self.run_cli('combine', '--m', '6', '--seed', '42')
        self.assertEqual(first, self.run_cli('combine', '--m', '6', '--seed', '42'))

    def test_errors(self):
        code, _, err = self.run_cli('combine', '--m', '4')
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid arguments')

        code, _, err = self.run_cli('combine', '--m', '1', '--seed', '0')
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err), {
            'code': '1001',
            'title': 'insufficient attributes',
            'detail': '1 attribute(s) cannot form two non-empty combinations',
            'status': '1',
        })

        code, _, err = self.run_cli('combine', '--m', '3', '--seed', str(2 ** 64))
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'out of range')

    def test_unknown_subcommand(self):
        for argv in (('split',), ()):
            code, out, err = self.run_cli(*argv)
            self.assertEqual(code, 1)
            self.assertEqual(out, '')
            self.assertTrue(err.startswith(USAGE))
            self.assertEqual(self.error_of(err)['title'], 'unknown subcommand')

    def test_call_command_raises(self):
        with self.assertRaises(AttrCommandError) as cm:
            call_command('combine', '--m', '1', '--seed', '0', stdout=StringIO())
        self.assertIs(cm.exception.error.reason, ErrorReason.INSUFFICIENT_ATTRIBUTES)
        self.assertEqual(cm.exception.returncode, 1)

    def test_run_report(self):
        def report_of(*argv: str) -> dict:
            with self.assertLogs('attrcontrast.management.base', 'INFO') as logs:
                self.run_cli(*argv)
            message = logs.records[-1].getMessage()
            self.assertTrue(message.startswith('run report: '))
            return json.loads(message[len('run report: '):])

        first = report_of('combine', '--m', '3', '--seed', '5')
        self.assertEqual(first['subcommand'], 'combine')
        self.assertEqual(first['outputs'], self.run_ok('combine', '--m', '3', '--seed', '5'))
        self.assertEqual(len(first['inputs_digest']), 64)
        self.assertEqual(first['inputs_digest'], report_of('combine', '--m', '3', '--seed', '5')['inputs_digest'])
        self.assertNotEqual(first['inputs_digest'], report_of('combine', '--m', '3', '--seed', '6')['inputs_digest'])


class MetricCommandTestCase(CommandTestCase):
    def test_fid_identical(self):
        path = self.root / 'x.catf'
        write_tensor(np.random.Generator(np.random.PCG64(0)).standard_normal((20, 3)), path)
        result = self.run_ok('fid', '--a', str(path), '--b', str(path))
        self.assertLess(result['fid'], 1e-8)
        self.assertGreaterEqual(result['fid'], 0.0)

    def test_fid_csv(self):
        (self.root / 'a.csv').write_text('0\n1\n2\n', encoding='utf-8')
        (self.root / 'b.csv').write_text('1\n2\n3\n', encoding='utf-8')
        result = self.run_ok('fid', '--a', str(self.root / 'a.csv'), '--b', str(self.root / 'b.csv'))
        self.assertAlmostEqual(result['fid'], 1.0, places=10)

    def test_fid_file_errors(self):
        good = self.root / 'x.catf'
        write_tensor(np.ones((3, 2)), good)
        bad = self.root / 'bad.catf'
        bad.write_bytes(b'XXXX' + bytes(20))
        for other, title in ((bad, 'malformed file'), (self.root / 'absent.catf', 'missing file')):
            code, _, err = self.run_cli('fid', '--a', str(good), '--b', str(other))
            self.assertEqual(code, 2)
            self.assertEqual(self.error_of(err)['title'], title)

    def test_lpips(self):
        write_tensor([1.0, 0.0], self.root / 'v.catf')
        write_tensor([0.0, 1.0], self.root / 'v_hat.catf')
        write_tensor([1.0, 1.0], self.root / 'omega.catf')
        manifest = self.write_json('layers.json', {'layers': [{'v': 'v.catf', 'v_hat': 'v_hat.catf', 'omega': 'omega.catf'}]})
        self.assertAlmostEqual(self.run_ok('lpips', '--layers', str(manifest))['lpips'], 2.0, places=12)

    def test_lpips_missing_layer_file(self):
        manifest = self.write_json('layers.json', {'layers': [{'v': 'v.catf', 'v_hat': 'v_hat.catf', 'omega': 'o.catf'}]})
        code, _, _ = self.run_cli('lpips', '--layers', str(manifest))
        self.assertEqual(code, 2)


class LossCommandTestCase(CommandTestCase):
    def test_attr_loss(self):
        write_tensor([[math.log(3.0)], [0.0]], self.root / 'v.catf')
        write_tensor([1.0, 1.0], self.root / 's.catf')
        result = self.run_ok('attr-loss', '--features', str(self.root / 'v.catf'), '--s', str(self.root / 's.catf'),
                             '--label', '1')
        self.assertAlmostEqual(result['score'], 0.75, places=12)
        self.assertAlmostEqual(result['l_attr'], -math.log(0.75), places=12)

    def test_attr_loss_bad_label(self):
        code, _, err = self.run_cli('attr-loss', '--features', 'v.catf', '--s', 's.catf', '--label', '2')
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid arguments')

    def test_objective_default_weights(self):
        result = self.run_ok('objective', '--config', str(FIXTURES / 'default_weights.json'))
        self.assertAlmostEqual(result['l_g'], 2.3, delta=1e-12)
        self.assertAlmostEqual(result['terms']['l_attr'], 0.9, delta=1e-12)
        self.assertEqual(result['terms']['adversarial_g'], 0.0)

    def test_objective_damsm_and_losses_file(self):
        config = self.write_json('objective.json', {
            'loss_weights': {'preset': 'unit'},
            'gamma': math.log(3.0),
            'adversarial': [{'d_fake_uncond': 0.5, 'd_fake_cond': 0.5}, {'d_fake_uncond': 1.0, 'd_fake_cond': 1.0}],
            'damsm': {'r_scores': [1.0, 0.0]},
            'l_per': 0.25,
        })
        losses = self.write_json('losses.json', {'l_diff': 0.5, 'l_per': 9.0})
        result = self.run_ok('objective', '--config', str(config), '--losses', str(losses))
        np.testing.assert_allclose(result['damsm_probabilities'], [0.75, 0.25], atol=1e-12)
        expected = math.log(2.0) / 2 + 0.5 + 0.25 - math.log(0.75)
        self.assertAlmostEqual(result['l_g'], expected, places=12)

    def test_objective_damsm_from_feature_files(self):
        write_tensor([[2.0, 0.0], [0.0, 5.0]], self.root / 'candidates.catf')
        write_tensor([1.0, 0.0], self.root / 'sentence.catf')
        config = self.write_json('objective.json', {
            'gamma': math.log(3.0),
            'adversarial': {'d_fake_uncond': 1.0, 'd_fake_cond': 1.0},
            'damsm': {'features': 'candidates.catf', 'sentence': 'sentence.catf', 'matched_index': 1},
        })
        result = self.run_ok('objective', '--config', str(config))
        np.testing.assert_allclose(result['damsm_probabilities'], [0.75, 0.25], atol=1e-12)
        self.assertAlmostEqual(result['terms']['l_damsm'], -math.log(0.25), places=12)
        self.assertAlmostEqual(result['l_g'], -math.log(0.25), places=12)

    def test_objective_damsm_feature_file_errors(self):
        write_tensor([1.0, 0.0], self.root / 'sentence.catf')
        missing = self.write_json('missing.json', {
            'adversarial': {'d_fake_uncond': 1.0, 'd_fake_cond': 1.0},
            'damsm': {'features': 'absent.catf', 'sentence': 'sentence.catf'},
        })
        code, _, err = self.run_cli('objective', '--config', str(missing))
        self.assertEqual(code, 2)
        self.assertEqual(self.error_of(err)['title'], 'missing file')
        for block in ({'r_scores': [1.0], 'features': 'a.catf', 'sentence': 'sentence.catf'},
                      {'sentence': 'sentence.catf'}, {}):
            config = self.write_json('objective.json', {
                'adversarial': {'d_fake_uncond': 1.0, 'd_fake_cond': 1.0}, 'damsm': block})
            code, _, err = self.run_cli('objective', '--config', str(config))
            self.assertEqual(code, 1, block)
            self.assertEqual(self.error_of(err)['title'], 'invalid config')

    def test_objective_needs_config(self):
        code, _, err = self.run_cli('objective')
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid arguments')

    def test_objective_invalid_config(self):
        config = self.write_json('objective.json', {'adversarial': {'d_fake_uncond': 2.0, 'd_fake_cond': 0.5}})
        code, _, err = self.run_cli('objective', '--config', str(config))
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid config')

    def test_gradcheck_seed(self):
        for target in ('l_diff', 'l_per', 'l_attr'):
            result = self.run_ok('gradcheck', '--target', target, '--seed', '3')
            self.assertEqual(result['target'], target)
            self.assertTrue(result['passed'])
            self.assertEqual((result['eps'], result['tol']), (1e-5, 1e-4))

    def test_gradcheck_degenerate_fixture(self):
        write_tensor([[100.0]], self.root / 'v.catf')
        write_tensor([100.0], self.root / 's.catf')
        code, _, err = self.run_cli('gradcheck', '--target', 'l_attr', '--fixture', str(self.root))
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'degenerate fixture')

    def test_gradcheck_needs_one_source(self):
        code, _, _ = self.run_cli('gradcheck', '--target', 'l_per')
        self.assertEqual(code, 1)
        code, _, _ = self.run_cli('gradcheck', '--target', 'l_per', '--seed', '1', '--fixture', str(self.root))
        self.assertEqual(code, 1)


class AttentionCommandTestCase(CommandTestCase):
    def test_equal_combinations(self):
        write_tensor(np.arange(8.0).reshape(2, 2, 2), self.root / 'v.catf')
        write_tensor([0.3, 0.4], self.root / 's.catf')
        s = str(self.root / 's.catf')
        result = self.run_ok('attention', '--features', str(self.root / 'v.catf'), '--s1', s, '--s2', s)
        self.assertEqual(result, {'spatial': [[0.5] * 4] * 2, 'channel': [[0.5] * 2] * 2})

    def test_images_need_out_dir(self):
        write_tensor(np.ones((2, 4)), self.root / 'v.catf')
        code, _, err = self.run_cli('attention', '--features', str(self.root / 'v.catf'), '--images', str(self.root))
        self.assertEqual(code, 1)
        self.assertEqual(self.error_of(err)['title'], 'invalid arguments')

    def test_non_utf8_attributes(self):
        write_tensor(np.ones((2, 4)), self.root / 'v.catf')
        bad = self.root / 'parsed.jsonl'
        bad.write_bytes(b'\xff\n')
        code, _, err = self.run_cli('attention', '--features', str(self.root / 'v.catf'), '--attributes', str(bad))
        self.assertEqual(code, 2)
        error = self.error_of(err)
        self.assertEqual(error['code'], str(ErrorReason.MALFORMED_FILE.value))
        self.assertIn(str(bad), error['detail'])

    def test_parse_without_split(self):
        self.write_pipeline_inputs()
        parsed = self.root / 'parsed.jsonl'
        parsed.write_text(self.run_cli('parse', '--in', str(FIXTURES / 'sentences.txt'))[1], encoding='utf-8')
        attention = ('attention', '--features', str(self.root / 'v.catf'), '--attributes', str(parsed), '--line', '1')

        code, _, err = self.run_cli(*attention)
        self.assertEqual(code, 1)
        self.assertIn('--split', self.error_of(err)['detail'])

        split = self.root / 'split.json'
        split.write_text(self.run_cli('combine', '--m', '3', '--seed', '9')[1], encoding='utf-8')
        result = self.run_ok(*attention, '--split', str(split))
        self.assertEqual(len(result['spatial'][0]), 4)

        code, _, _ = self.run_cli(*attention[:-1], '7')
        self.assertEqual(code, 1)

    def write_pipeline_inputs(self) -> None:
        generator = np.random.Generator(np.random.PCG64(100))
        write_tensor(generator.standard_normal((32, 4)), self.root / 'v.catf')
        images = self.root / 'images'
        images.mkdir()
        for name in ('orig.catf', 'edit1.catf', 'edit2.catf'):
            write_tensor(generator.standard_normal((3, 2, 2)), images / name)
        self.write_json('objective.json', {
            'adversarial': {'d_fake_uncond': 0.4, 'd_fake_cond': 0.6},
            'l_damsm': 0.5,
            'l_attr': 0.2,
        })

    def run_pipeline(self, run: str) -> list:
        outputs = []

        def step(output_name: str, *argv: str) -> Path:
            code, out, err = self.run_cli(*argv)
            self.assertEqual(code, 0, err)
            outputs.append(out)
            path = self.root / run / output_name
            path.write_text(out, encoding='utf-8')
            return path

        (self.root / run).mkdir()
        parsed = step('parsed.jsonl', 'parse', '--in', str(FIXTURES / 'sentences.txt'), '--split', '--seed', '7')
        step('split.json', 'combine', '--m', '4', '--seed', '7')
        batch = self.root / run / 'batch'
        step('attention.json', 'attention', '--features', str(self.root / 'v.catf'), '--attributes', str(parsed),
             '--line', '0', '--images', str(self.root / 'images'), '--out-dir', str(batch))
        losses = step('losses.json', 'losses', '--batch', str(batch))
        step('objective.json', 'objective', '--config', str(self.root / 'objective.json'), '--losses', str(losses))
        outputs.extend((batch / name).read_bytes().hex() for name in sorted(p.name for p in batch.iterdir()))
        return outputs

    def test_pipeline_is_deterministic(self):
        self.write_pipeline_inputs()
        first = self.run_pipeline('first')
        self.assertEqual(first, self.run_pipeline('second'))

        attention = json.loads(first[2])
        self.assertEqual(attention['sextet'], [f'{name}.catf' for name in
                                               ('v1_pos', 'v1_neg', 'v2_pos', 'v2_neg', 'v_ori1', 'v_ori2')])
        losses = json.loads(first[3])
        self.assertTrue(math.isfinite(losses['l_diff']))
        self.assertGreaterEqual(losses['l_per'], 0.0)
        objective = json.loads(first[4])
        self.assertAlmostEqual(objective['terms']['l_diff'], 0.7 * losses['l_diff'], places=12)
        self.assertAlmostEqual(objective['terms']['l_attr'], 0.9 * 0.2, places=12)
