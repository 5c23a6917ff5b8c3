from setuptools import setup, find_packages

setup(
    name="dfdam-lab",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    include_package_data=True,
    install_requires=[
        "numpy>=1.24",
        "pydantic",
        "pydantic-settings",
        "python-dotenv",
        "click",
        "tqdm",
    ],
    extras_require={
        "test": [
            "pytest",
            "pytest-cov",
        ],
    },
    entry_points={
        "console_scripts": [
            "dfdam=app.main:main",
        ],
    },
    python_requires=">=3.10",
)
