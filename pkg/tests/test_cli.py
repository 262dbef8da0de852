import json
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

from chiralkit import cli
from tests.util import cli_parser, cli_test, config_fixture


class TestCliParsing(unittest.TestCase):
    @cli_test()
    def test_when_no_command_is_given_it_terminates_with_error(self, parser):
        with patch.object(parser, 'error', side_effect=SystemExit(2)) as error_method:
            args = parser.parse_args()
            with self.assertRaises(SystemExit):
                cli.run_cli(parser, args, config_fixture())
            error_method.assert_called_once_with('a command is required')

    @cli_test('--seed', '7', '--threads', '3', 'lutz', '--s', '0.25')
    def test_when_passing_global_flags_they_are_parsed_before_the_command(self, parser):
        args = parser.parse_args()
        self.assertEqual('lutz', args.command)
        self.assertEqual(7, args.seed)
        self.assertEqual(3, args.threads)
        self.assertEqual(0.25, args.s)

    @cli_test('--threads', '2', '--text-logger', 'lutz', '--s', '0', '--t', '1', '--export-grid', '32')
    def test_when_a_command_option_prefixes_a_global_flag_it_stays_with_the_command(self, parser):
        args = parser.parse_args()
        self.assertEqual(1.0, args.t)
        self.assertEqual(2, args.threads)
        self.assertTrue(args.text_logger)
        self.assertEqual(32, args.export_grid)

    @cli_test('--thread', '2', 'lutz')
    def test_when_a_global_flag_is_abbreviated_it_is_rejected(self, parser):
        with patch.object(parser, 'error', side_effect=SystemExit(2)):
            with self.assertRaises(SystemExit):
                parser.parse_args()

    @cli_test('surface')
    def test_when_omitting_optional_arguments_the_defaults_apply(self, parser):
        args = parser.parse_args()
        self.assertEqual('y, -x', args.X)
        self.assertEqual(1, args.orientation)
        self.assertIsNone(args.output_dir)

    def test_when_every_command_is_registered_it_is_reachable_by_name(self):
        self.assertEqual({'analyze', 'perturb', 'series', 'check', 'metric', 'abc', 'lutz', 'divide', 'surface',
                          'trace', 'verify'}, set(cli.COMMANDS_BY_NAME))


class TestCliRun(unittest.TestCase):
    def setUp(self):
        self.output_dir = tempfile.mkdtemp()
        self.config = config_fixture(output_dir=self.output_dir)

    def tearDown(self):
        shutil.rmtree(self.output_dir, ignore_errors=True)

    def run_command(self, *cli_args):
        with cli_parser(*cli_args) as parser:
            args = parser.parse_args()
            return cli.run_cli(parser, args, self.config)

    def read_output(self, filename):
        with open(os.path.join(self.output_dir, filename)) as f:
            return json.load(f)

    def test_when_the_form_is_contact_the_check_passes(self):
        self.assertEqual(cli.EXIT_PASS, self.run_command('check', '--eta', '-y/2, x/2, 1'))
        defect = self.read_output('defect.json')
        self.assertEqual('positive-semidefinite', defect['sign_verdict'])

    def test_when_checking_a_form_the_defect_file_lists_every_field(self):
        self.run_command('check', '--eta', '-y/2, x/2, 1')
        defect = self.read_output('defect.json')
        self.assertEqual({'defect', 'defect_text', 'sign_verdict', 'certified', 'zero_samples', 'sampled_min',
                          'sampled_max'}, set(defect))
        self.assertEqual('1', defect['defect_text'])
        self.assertTrue(defect['certified'])
        self.assertEqual([], defect['zero_samples'])

    def test_when_the_defect_changes_sign_the_check_fails(self):
        self.assertEqual(cli.EXIT_FAIL, self.run_command('check', '--eta', '0, x, z'))
        self.assertFalse(os.path.exists(os.path.join(self.output_dir, 'error.json')))

    def test_when_the_germ_does_not_parse_it_writes_an_error_file(self):
        self.assertEqual(cli.EXIT_ERROR, self.run_command('perturb', 'x^2 + w'))
        error = self.read_output('error.json')
        self.assertEqual('Input', error['category'])
        self.assertIn('column 7', error['error'])

    def test_when_a_flag_is_invalid_the_configuration_error_is_written(self):
        self.assertEqual(cli.EXIT_ERROR, self.run_command('--threads', '0', 'check', '--eta', '-y/2, x/2, 1'))
        self.assertEqual('Configuration', self.read_output('error.json')['category'])

    @patch('chiralkit.command.contact_defect', side_effect=RuntimeError('boom'))
    def test_when_a_command_fails_unexpectedly_the_category_is_unknown(self, contact_defect):
        self.assertEqual(cli.EXIT_ERROR, self.run_command('check', '--eta', '-y/2, x/2, 1'))
        error = self.read_output('error.json')
        self.assertEqual('Unknown', error['category'])
        self.assertIn('boom', error['error'])

    def test_when_overriding_the_output_dir_the_files_go_there(self):
        nested = os.path.join(self.output_dir, 'nested')
        self.assertEqual(cli.EXIT_PASS, self.run_command('--output-dir', nested, 'surface'))
        self.assertTrue(os.path.isfile(os.path.join(nested, 'surface.json')))

    def test_when_analyzing_the_morse_germ_it_reports_its_index(self):
        self.assertEqual(cli.EXIT_PASS, self.run_command('analyze', 'Morse1'))
        report = self.read_output('report.json')
        self.assertEqual(-1, report['numeric_index']['index'])

    def test_when_perturbing_a_germ_the_defect_is_positive(self):
        self.assertEqual(cli.EXIT_PASS, self.run_command('perturb', 'Morse1', '--t', '1/2'))
        self.assertEqual('1/2', self.read_output('perturbation.json')['t'])

    def test_when_exporting_the_lutz_form_the_grid_and_report_are_written(self):
        self.assertEqual(cli.EXIT_PASS, self.run_command('lutz', '--s', '0', '--t', '1', '--export-grid', '32'))
        report = self.read_output('lutz.json')
        self.assertEqual('PASS', report['defect_check'])
        self.assertEqual(1.0, report['t'])
        with open(os.path.join(self.output_dir, 'lutz_grid.csv')) as f:
            self.assertEqual(32 ** 3 + 1, sum(1 for _ in f))

    def test_when_dividing_with_an_expectation_that_misses_it_fails(self):
        self.assertEqual(cli.EXIT_FAIL, self.run_command('divide', '--eta', '-y/2, x/2, 1', '--expect', '2'))
        self.assertEqual(1, self.read_output('dividing_set.json')['component_count'])

    def test_when_running_the_same_command_twice_the_output_is_identical(self):
        self.run_command('--seed', '3', 'metric', '--points', '20')
        with open(os.path.join(self.output_dir, 'metric.json')) as f:
            first = f.read()
        self.run_command('--seed', '3', 'metric', '--points', '20')
        with open(os.path.join(self.output_dir, 'metric.json')) as f:
            self.assertEqual(first, f.read())
