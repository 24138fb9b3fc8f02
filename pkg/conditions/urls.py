from rest_framework.routers import DefaultRouter
from .views import ConditionArtifactViewSet

router = DefaultRouter()
router.register(r'', ConditionArtifactViewSet, basename='condition')

urlpatterns = router.urls
