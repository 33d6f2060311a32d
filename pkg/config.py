from pathlib import Path
import os

VERSION = '0.3.0'

def get_config():
    return {
        'version': VERSION,
        # classical gain spectra, half widths are in units of gamma_eff
        'gain_grid_points': 2001,
        'gain_grid_halfwidth': 40,
        # quantum noise spectra
        'noise_grid_points': 2001,
        'noise_grid_halfwidth': 20,
        'bandwidth_points': 2001,
        'bandwidth_halfwidth': 10,
        'bandwidth_max_doublings': 6,
        # oracle
        'oracle_tol': 1e-9,
        'oracle_draws': 100,
        'oracle_freqs_per_draw': 10,
        'oracle_cond_limit': 1e12,
        'seed': 1234,
        # io
        'csv_digits': 12,
        'output_folder': 'results',
        'experiment_name': 'runs',
        'log_tensorboard': True,
        'num_threads': None,
        'threads_env_var': 'OPTOMECH_NUM_THREADS',
    }


def get_output_file_path(config, name: str, fmt: str = 'csv'):
    return str(Path(config['output_folder']) / f"{name}.{fmt}")

# tensorboard logs sit next to the data files they describe
def get_log_dir(config, name: str):
    return str(Path(config['output_folder']) / config['experiment_name'] / name)


def get_num_threads(config):
    value = os.environ.get(config['threads_env_var'])
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            pass
    if config['num_threads']:
        return int(config['num_threads'])
    return os.cpu_count() or 1
