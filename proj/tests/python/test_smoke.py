def test_import():
    import bivicap
    assert bivicap.softmax([0.0, 0.0]) == [0.5, 0.5]
