#!/usr/bin/env python3
"""
Setup script for funcnet
This script creates a virtual environment, installs the requirements and runs the tests
"""

import os
import sys
import subprocess
from pathlib import Path

MIN_PYTHON = (3, 9)


def run_command(command, cwd=None, check=True):
    """Run a command and return whether it succeeded"""
    try:
        result = subprocess.run(command, shell=True, cwd=cwd, check=check,
                                capture_output=True, text=True)
        return result.returncode == 0
    except subprocess.CalledProcessError as e:
        print(f"Error running command: {command}")
        print(f"Error: {e.stderr}")
        return False


def check_requirements():
    """Check the interpreter version"""
    print("🔍 Checking system requirements...")
    if sys.version_info < MIN_PYTHON:
        print(f"❌ Python {MIN_PYTHON[0]}.{MIN_PYTHON[1]}+ is required, found {sys.version.split()[0]}")
        return False
    print(f"✅ Python {sys.version.split()[0]}")
    return True


def venv_executable(venv_dir: Path, name: str) -> str:
    if os.name == 'nt':  # Windows
        return str(venv_dir / "Scripts" / name)
    return str(venv_dir / "bin" / name)


def setup_environment():
    """Create the virtual environment and install dependencies"""
    print("\n🐍 Setting up Python environment...")

    venv_dir = Path("venv")
    if not venv_dir.exists():
        print("📦 Creating virtual environment...")
        if not run_command(f"{sys.executable} -m venv venv"):
            return False

    pip_cmd = venv_executable(venv_dir, "pip")
    print("📦 Installing Python dependencies...")
    if not run_command(f"{pip_cmd} install --upgrade pip"):
        return False
    if not run_command(f"{pip_cmd} install -r requirements.txt"):
        return False

    print("✅ Environment setup complete!")
    return True


def run_tests():
    """Run the fast test suite"""
    print("\n🧪 Running tests...")
    python_cmd = venv_executable(Path("venv"), "python")
    if not run_command(f"{python_cmd} -m pytest -q", check=False):
        print("⚠️  Some tests failed, run `pytest` for details")
        return False
    print("✅ Tests passed!")
    return True


def print_usage_instructions():
    print("\n" + "="*60)
    print("🎉 SETUP COMPLETE!")
    print("="*60)

    activate = "venv\\Scripts\\activate" if os.name == 'nt' else "source venv/bin/activate"
    print(f"\n🚀 Activate the environment:\n   {activate}")
    print("\n📈 Try it:")
    print("   python main.py simulate --scenario single_index --seed 1 --out data.csv")
    print("   python main.py fit --data data.csv --model FBNN --out model.json")
    print("   python main.py predict --weights model.json --data data.csv")
    print("   python main.py benchmark --reps 2 --out results/")

    print("\n🔧 Configuration:")
    print("   - FUNCNET_LOG_LEVEL, FUNCNET_THREADS in the environment or a .env file")
    print("   - JSON run configuration via --config")
    print("   - FUNCNET_RUN_SLOW=1 enables the long reproduction tests")

    print("\n" + "="*60)


def main():
    """Main setup function"""
    print("🚀 funcnet Setup")
    print("="*50)

    if not check_requirements():
        sys.exit(1)

    if not setup_environment():
        print("❌ Environment setup failed!")
        sys.exit(1)

    run_tests()
    print_usage_instructions()


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # invoked by a build backend (pip install): package metadata lives in pyproject.toml
        from setuptools import setup
        setup()
    else:
        main()
