"""
Install the Tropical EP Analyzer dependencies and register the project on the Python path.

Usage:
    python install_requirements.py            # install, register, verify
    python install_requirements.py --no-pth   # skip the .pth registration
"""

import argparse
import os
import site
import subprocess
import sys

MIN_PYTHON = (3, 10)
PTH_NAME = "tropical_ep_analyzer.pth"

# import name -> what the analyzer needs it for
REQUIRED_IMPORTS = {
    "pydantic": "parameter and run-config validation",
    "pydantic_settings": "environment settings",
    "dotenv": ".env loading",
    "numpy": "sampling grids and CSV output",
    "scipy": "eigenvalues, assignment, regression, peaks",
    "sympy": "polynomial text parsing",
    "matplotlib": "SVG rendering",
    "pytest": "test runner",
}


def check_python() -> bool:
    """Refuse interpreters older than MIN_PYTHON."""
    if sys.version_info < MIN_PYTHON:
        wanted = ".".join(map(str, MIN_PYTHON))
        print(f"❌ Python {wanted}+ is required, found {sys.version.split()[0]}")
        return False
    print(f"✅ Python {sys.version.split()[0]}")
    return True


def pip_install(project_dir: str) -> bool:
    """Install requirements.txt with the running interpreter's pip."""
    requirements = os.path.join(project_dir, "requirements.txt")
    print(f"Installing packages from {requirements}...")
    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", requirements])
    except subprocess.CalledProcessError as e:
        print(f"❌ pip exited with status {e.returncode}")
        return False
    print("✅ Packages installed")
    return True


def register_project(project_dir: str) -> bool:
    """Write a .pth file so that `import app` works from any directory."""
    candidates = site.getsitepackages() if hasattr(site, "getsitepackages") else []
    candidates = candidates or [site.getusersitepackages()]
    pth_file = os.path.join(candidates[0], PTH_NAME)
    try:
        with open(pth_file, "w") as f:
            f.write(project_dir + "\n")
    except OSError as e:
        print(f"❌ Cannot write {pth_file}: {e}")
        return False
    print(f"✅ Registered {project_dir} via {pth_file}")
    return True


def verify_imports() -> bool:
    """Import every dependency and report the ones that fail."""
    missing = []
    for name, purpose in REQUIRED_IMPORTS.items():
        try:
            __import__(name)
        except ImportError as e:
            missing.append(name)
            print(f"❌ {name} ({purpose}): {e}")
        else:
            print(f"✅ {name}")
    if missing:
        print(f"\nMissing: {', '.join(missing)}")
    return not missing


def main() -> int:
    parser = argparse.ArgumentParser(description="Install the Tropical EP Analyzer")
    parser.add_argument("--no-pth", action="store_true", help="do not write a .pth file")
    args = parser.parse_args()

    project_dir = os.path.abspath(os.path.dirname(__file__))
    print("=" * 60)
    print("Tropical EP Analyzer - Package Installation")
    print("=" * 60)

    steps = [check_python, lambda: pip_install(project_dir)]
    if not args.no_pth:
        steps.append(lambda: register_project(project_dir))
    steps.append(verify_imports)

    for step in steps:
        if not step():
            print("\nInstallation stopped; see the messages above.")
            return 1
        print()

    print("=" * 60)
    print("✅ Installation complete. Try:")
    print("  python -m app.main analyze --config configs/two_site_ep2.json")
    print("  python -m app.main verify --model ssh_collapsed")
    print("=" * 60)
    return 0


if __name__ == "__main__":
    sys.exit(main())
