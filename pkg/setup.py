from setuptools import setup, find_packages

__version__ = '0.1.0'

setup(
    name='multoeplitz',
    version=__version__,
    description="Multiplicative and additive Toeplitz truncations: Szego-type limit theorems as reproducible sweeps.",
    long_description=open('README.md').read(),
    packages=find_packages(exclude=['tests', 'tests.*']),
    entry_points={
        'console_scripts': ['multoeplitz = multoeplitz.cli:cli']
    },
    install_requires=[
        'pydantic>=2',
        'pytest',
        'click',
        'orjson',
        'tqdm',
        'pandas',
        'numpy',
        'scipy',
    ],
    tests_require=['pytest', 'hypothesis'],
    extras_require={'test': ['pytest', 'hypothesis']},
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3.12',
        'License :: OSI Approved :: MIT License',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering',
        'Topic :: Scientific/Engineering :: Mathematics'
    ],
    platforms=['any'],
    python_requires='>=3.11, <4.0',
)
