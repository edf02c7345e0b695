# MIT License - Copyright fastcc contributors
# See the LICENSE.md file included in this source code package

from setuptools import setup
from os import path

description_file = path.join(path.abspath(path.dirname(__file__)), "DESCRIPTION.md")
with open(description_file, encoding="utf-8") as f:
    long_description = f.read()

setup(
    name = "fastcc",
    version = "1.0.0",
    description = "Fast cross-correlation for time difference of arrival estimation",
    long_description = long_description,
    long_description_content_type = "text/markdown",
    author = "fastcc contributors",
    license = "MIT",

    classifiers = [
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Topic :: Multimedia :: Sound/Audio :: Analysis",
        "Topic :: Scientific/Engineering",
        "Topic :: Scientific/Engineering :: Physics",
        "Typing :: Typed"
    ],
    keywords = "tdoa gcc-phat cross-correlation sound-source-localization microphone-array",

    packages = [ "fastcc" ],
    package_data = { "fastcc": ["py.typed"] },
    python_requires = ">=3.8",
    # sliding_window_view needs NumPy 1.20, norm="forward" needs SciPy 1.6,
    # pivot_table(sort=False) needs pandas 1.3
    install_requires = [ "numpy>=1.20", "numpy<2.0", "scipy>=1.6", "pandas>=1.3",
        "threadpoolctl>=3.0" ],
    extras_require = {
        "dev": [ "pytest>=6.0", "mypy>=0.900" ]
    },
    entry_points = {
        "console_scripts": [ "fastcc = fastcc._cli:main" ]
    }
)
