import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="rdkan-workbench",
    version="0.1.0",
    description="Range-Doppler segment detection workbench: FMCW simulation, OS-CFAR and KAN detectors",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=['tests', 'tests.*']),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
    install_requires=['numpy', 'scipy', 'pandas', 'torch', 'openpyxl', 'pyfiglet', 'colorama', 'tabulate',
        'jinja2', 'pyyaml', 'attrs', 'tqdm', 'nettoolkit',
    ],
    extras_require={
        'test': ['pytest', ],
        'docs': ['sphinx', 'sphinx_rtd_theme', ],
    },
    entry_points={
        'console_scripts': ['rdkan=rdkan.cli:main', ],
    },
)
