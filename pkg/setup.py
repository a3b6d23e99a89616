"""
    polydisc-carleson: boundedness of composition operators on weighted Bergman spaces of the polydisc
    Copyright (C) 2026 the polydisc-carleson authors

    This program is free software: you can redistribute it and/or modify
    it under the terms of the GNU Affero General Public License as
    published by the Free Software Foundation, either version 3 of the
    License, or any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
    GNU Affero General Public License for more details.

    You should have received a copy of the GNU Affero General Public License
    along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""
from setuptools import setup, find_packages

# To install local development version use:
#    pip install -e .[test]

setup(
    name='polydisc-carleson',
    version='0.1.0',
    description='Boundedness of composition operators on weighted Bergman spaces of the polydisc',
    author='the polydisc-carleson authors',
    license='AGPLv3',
    packages=find_packages(exclude=['tests', 'scripts']),
    python_requires='>=3.8',
    install_requires=[
        'numpy>=1.19',
        'scipy>=1.5',
        'pandas>=1.2',
        'scikit-learn>=0.23',
        'joblib>=1.0',
    ],
    extras_require={'test': ['pytest>=6.2', 'hypothesis>=6.0']},
    entry_points={'console_scripts': ['polydisc-carleson=polydisc_carleson.cli:main']},
)
