from setuptools import setup, find_packages


with open("README.md", "r", encoding='utf-8') as fh:
    long_description = fh.read()


setup(
    name='PyLBT',
    version='0.1.0',
    packages=find_packages(where='.', include=['PyLBT*']),
    package_dir={'': '.'},
    install_requires=[
        'matplotlib',
        'numpy',
        'p_tqdm',
        'pandas',
        'pystoi',
        'scipy',
        'setuptools',
        'soundfile',
        'tqdm',
    ],
    extras_require={
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'pylbt=PyLBT.harness.cli:main',
        ],
    },
    description='Location-based training for multichannel speaker separation',
    long_description=long_description,
    long_description_content_type='text/markdown',
    classifiers=[
        'Programming Language :: Python :: 3',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.9',
)
