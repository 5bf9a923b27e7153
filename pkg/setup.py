from setuptools import setup

setup(
    name='libkingsgrid',
    version='1.0.0',
    author='libkingsgrid contributors',
    packages=['libkingsgrid'],
    url='https://github.com/libkingsgrid/libkingsgrid',
    license='LICENSE',
    description="Numerical verification of dispersive decay for the discrete Schrödinger equation on the King's grid.",
    long_description_content_type="text/markdown",
    long_description=open('README.md').read(),
    install_requires=[
        "numpy",
        "scipy",
        "pandas",
        "tqdm",
        "scikit-image",
        "tabulate"
    ],
    entry_points={
        'console_scripts': ['lkg=libkingsgrid.cli:main'],
    },
)
