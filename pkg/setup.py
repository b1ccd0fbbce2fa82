from setuptools import setup, find_packages

setup(
    name='evdiff',
    version='0.1.0',
    description='Event-guided video frame reconstruction, interpolation and prediction with toy diffusion models',
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    package_data={"evdiff": ["example.ini"]},
    install_requires=[
        'numpy==1.26.2',
        'scipy==1.11.4',
        'Pillow==10.1.0',
    ],
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: GPL-3.0 License',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.9',
    entry_points={
        "console_scripts": [
            "evdiff = evdiff.cli:main",
        ]
    },
)
