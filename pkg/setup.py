from setuptools import setup, find_packages

setup(
    name="boxvote",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    install_requires=[
        "click>=8.0.0",
        "pydantic>=2.0.0",
        "pyyaml>=5.4.0",
        "numpy>=1.24.0",
        "scipy>=1.10.0",
        "plyfile>=0.9",
    ],
    entry_points={
        "console_scripts": [
            "boxvote=cli.main:cli",
        ],
    },
)
