"""Stereo ORB visual frontend."""
