from __future__ import annotations

import os
import sys
import argparse
from datetime import datetime
from typing import Callable, Mapping

DEFAULTS = {
    'PLANTWATCH_ENV': 'development',
    'LOG_LEVEL': 'INFO',
    'CYCLE_MS': '100',
    'CONVERGENCE_WINDOW': '',
    'DETECTOR_POLICY': 'resync',
    'SYNDROME_WINDOW_MS': '300000',
    'BASE_IRI': 'http://example.org/',
    'PLANT_NAME': 'fivetank',
    'OWNER_ENTITY': 'MixingModule',
    'DEFAULT_SEED': '7',
}

PROMPTS = {
    'PLANTWATCH_ENV': 'Environment (development/production/testing)',
    'DETECTOR_POLICY': 'Detector policy after unknown events (halt/resync)',
    'BASE_IRI': 'Base IRI for the knowledge graph',
    'DEFAULT_SEED': 'Default simulator seed',
}

GITIGNORE = """# Environment variables
.env

# Python
__pycache__/
*.pyc
*.pyo
*.pyd
.Python
env/
venv/
ENV/
.pytest_cache/

# Pipeline output
runs/
out/
*.jsonl
manifest.json

# IDE
.vscode/
.idea/
*.swp
*.swo

# OS
.DS_Store
Thumbs.db

# Logs
*.log
logs/
"""


def render_env(values: Mapping[str, str]) -> str:
    """Render the .env file content"""
    return f"""# PlantWatch Environment Configuration
# Generated on {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}

# Pipeline Settings
PLANTWATCH_ENV={values['PLANTWATCH_ENV']}
LOG_LEVEL={values['LOG_LEVEL']}

# Event Model / Learner
CYCLE_MS={values['CYCLE_MS']}
# Empty = dynamic window max(50, 3 * transitions)
CONVERGENCE_WINDOW={values['CONVERGENCE_WINDOW']}

# Detector
DETECTOR_POLICY={values['DETECTOR_POLICY']}
SYNDROME_WINDOW_MS={values['SYNDROME_WINDOW_MS']}

# Knowledge Graph
BASE_IRI={values['BASE_IRI']}
PLANT_NAME={values['PLANT_NAME']}
OWNER_ENTITY={values['OWNER_ENTITY']}

# Simulator
DEFAULT_SEED={values['DEFAULT_SEED']}
"""


def setup_environment(
    directory: str = '.',
    force: bool = False,
    interactive: bool = True,
    input_func: Callable[[str], str] = input,
) -> bool:
    """
    Write .env (and .gitignore if missing) into `directory`

    Returns:
        bool: False if an existing .env was kept
    """
    env_path = os.path.join(directory, '.env')
    print("🔧 Setting up PlantWatch Environment...")

    if os.path.exists(env_path) and not force:
        if not interactive:
            print("⚠️  .env file already exists, use --force to overwrite")
            return False
        response = input_func("Do you want to overwrite the existing .env? (y/N): ")
        if response.lower() != 'y':
            print("❌ Setup cancelled")
            return False

    values = dict(DEFAULTS)
    if interactive:
        print("\n📝 Press Enter to keep a default:")
        for key, prompt in PROMPTS.items():
            answer = input_func(f"{prompt} [{values[key]}]: ").strip()
            if answer:
                values[key] = answer

    with open(env_path, 'w') as f:
        f.write(render_env(values))
    print("✅ Environment file created successfully!")

    gitignore_path = os.path.join(directory, '.gitignore')
    if not os.path.exists(gitignore_path):
        with open(gitignore_path, 'w') as f:
            f.write(GITIGNORE)
        print("📄 .gitignore file created")
    return True


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description='Create a PlantWatch .env file')
    parser.add_argument('--force', action='store_true', help='Overwrite an existing .env')
    parser.add_argument('--non-interactive', action='store_true', help='Write defaults without prompting')
    options = parser.parse_args()
    created = setup_environment(force=options.force, interactive=not options.non_interactive)
    sys.exit(0 if created else 1)
