# -*- coding: utf-8 -*-
# Copyright 2026 agclust contributors

from setuptools import find_packages, setup

with open('README.md', 'r') as fin:
    readme_lines = fin.readlines()
long_description = ''.join(readme_lines[
    readme_lines.index('<!-- LONG_DESCRIPTION_START -->\n') + 1:
    readme_lines.index('<!-- LONG_DESCRIPTION_END -->\n'):
])

setup(
    name="agclust",
    install_requires=[
        'attrs >= 19.2.0',  # For eq= on attr.s.
        'numpy >= 1.17',  # First release with numpy.random.default_rng.
        'scipy >= 1.4',
        'networkx >= 2.4',
    ],
    python_requires='>=3.6, <4',

    packages=find_packages(),
    include_package_data=True,

    zip_safe=True,

    entry_points={
        'console_scripts': [
            'agclust = agclust.cli:main',
        ],
    },

    license="Apache License 2.0",
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: MacOS :: MacOS X',
        'Operating System :: POSIX',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: Implementation :: CPython',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],

    description="Contrastive clustering of attributed graphs",
    long_description=long_description,
    long_description_content_type='text/markdown',
    keywords=['graph clustering', 'contrastive learning', 'graph neural network'],
)
