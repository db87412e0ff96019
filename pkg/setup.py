import os

from setuptools import Extension, setup

# The compiled quadrature core is optional: the package falls back to a
# scipy-based implementation when the extension is absent (see
# edsense._backend).  Set EDSENSE_PURE_PYTHON=1 to skip building it.
ext_modules = []
if os.environ.get("EDSENSE_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "edsense._ext_core",
                    sources=["src/edsense/_ext_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

# metadata lives in pyproject.toml; the essentials are repeated here so
# legacy setuptools code paths (pre PEP 621) still resolve the layout
setup(
    name="edsense",
    version="0.1.0",
    package_dir={"": "src"},
    packages=["edsense"],
    entry_points={"console_scripts": ["edsense = edsense.cli:main"]},
    ext_modules=ext_modules,
)
