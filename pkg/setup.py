#!/usr/bin/env python3
"""
QRM Setup Script
================
Packaging for the quasi-reversibility reconstruction toolkit.

Installs the top-level packages and the ``qrm`` console script:

    pip install -e .
    qrm run --profile quick --test 1 --delta 0
"""

from pathlib import Path

from setuptools import find_packages, setup


def read_requirements():
    """Runtime requirements from requirements.txt (pytest is left to the test extra)."""
    lines = Path(__file__).with_name('requirements.txt').read_text(encoding='utf-8').splitlines()
    return [line.strip() for line in lines if line.strip() and not line.startswith(('#', 'pytest'))]


setup(
    name='qrm-reconstruction',
    version='1.0.0',
    description='Initial-condition recovery for parabolic equations by the quasi-reversibility method',
    long_description=Path(__file__).with_name('README.md').read_text(encoding='utf-8'),
    long_description_content_type='text/markdown',
    python_requires='>=3.10',
    packages=find_packages(include=['models', 'tools', 'services', 'commands']),
    py_modules=['app', 'config'],
    install_requires=read_requirements(),
    extras_require={'test': ['pytest==8.4.2']},
    entry_points={
        'console_scripts': [
            'qrm=app:main',
        ],
    },
)
