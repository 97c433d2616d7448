import pytest

from nwaq.corpus import art, art1, average_excess, cond_a1, cond_a2, corpus, mca_counter


@pytest.fixture(scope="session")
def all_corpus():
    return corpus()


@pytest.fixture(scope="session")
def a_art():
    return art()


@pytest.fixture(scope="session")
def a_art1():
    return art1()


@pytest.fixture(scope="session")
def a_ae():
    return average_excess()


@pytest.fixture(scope="session")
def a_cond1():
    return cond_a1()


@pytest.fixture(scope="session")
def a_cond2():
    return cond_a2()


@pytest.fixture(scope="session")
def m_counter():
    return mca_counter()
