# -*- coding: utf-8 -*-
# setup.py: the setuptools script
#
import setuptools

VERSION = '0.1.0'

install_requires = [
    "numpy>=1.20",
    "scipy>=1.7",
]


def get_setup_args():
    return dict(
        name="mlacrb",
        version=VERSION,
        description="Near-field velocity Cramer-Rao bounds for modular linear arrays",
        long_description=open("README.md", encoding="utf-8").read(),
        long_description_content_type="text/markdown",
        platforms="ALL",
        python_requires=">=3.8",
        package_dir={"mlacrb": "mlacrb"},
        packages=["mlacrb"],
        install_requires=install_requires,
        entry_points={
            "console_scripts": ["mlacrb = mlacrb.cli:main"],
        },
        classifiers=[
            "Development Status :: 4 - Beta",
            "Intended Audience :: Science/Research",
            "Operating System :: OS Independent",
            "Programming Language :: Python",
            "Programming Language :: Python :: 3",
            "Topic :: Scientific/Engineering :: Mathematics",
            "Topic :: Scientific/Engineering :: Physics"],
    )


if __name__ == "__main__":
    setuptools.setup(**get_setup_args())
