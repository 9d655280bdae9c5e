from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "cbp._cbp",
    sources=[
        "bindings/module.cpp",
        "src/io.cpp",
        "src/bilinear.cpp",
        "src/sketch.cpp",
        "src/rm.cpp",
        "src/ts.cpp",
        "src/postproc.cpp",
        "src/synth.cpp",
    ],
    include_dirs=["include"],
    libraries=["fftw3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
