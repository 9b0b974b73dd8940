from setuptools import setup, find_packages

# Read requirements.txt and filter out empty lines/comments
with open("requirements.txt") as req_file:
    requirements = [
        line.strip() for line in req_file if line.strip() and not line.startswith("#")
    ]

setup(
    name="fraisse-workbench",
    version="0.3",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=requirements,
    include_package_data=True,
    python_requires=">=3.9",
    entry_points={
        "console_scripts": [
            "fraisse=fraisse.main:main",
        ],
    },
)
