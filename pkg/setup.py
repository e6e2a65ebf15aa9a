from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pure-Python install; the package falls back at import
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "spiralflow.flow._ckernel",
                ["src/spiralflow/flow/_ckernel.pyx"],
                # keep a*b+c as two roundings so both backends agree bitwise
                extra_compile_args=["-O2", "-ffp-contract=off"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": 3, "embedsignature": True},
    )

setup(ext_modules=ext_modules)
