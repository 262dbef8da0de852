import chiralkit


def get_version():
    """
    Get the version of the currently running chiralkit.

    Returns
    -------
    string
        A string representing the current version.
    """
    return chiralkit.__version__
