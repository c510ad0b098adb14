from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "fscbound._core",
    [
        "src/python/module.cpp",
        "src/channel.cpp",
        "src/context.cpp",
        "src/belief.cpp",
        "src/info.cpp",
        "src/dp.cpp",
        "src/mc.cpp",
        "src/experiment.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
    extra_compile_args=["-O2"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
