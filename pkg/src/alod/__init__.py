"""Active-learning object detection at desk scale: weak labels, acquisition
scoring, pseudo-label filtering, copy-paste auxiliary data, a surrogate
student/teacher detector, and a live annotation service."""

__version__ = "0.1.0"
